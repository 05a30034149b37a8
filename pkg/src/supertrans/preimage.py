"""Constructive preimages ``Z = psi^-1(W)`` of a transversal morphism.

For every adapted chart of ``W`` the defining submersion
``Psi = Pr o phi o psi`` is formed; its zero level set is the local piece of
``Z``.  When ``Psi`` is coordinate-affine (constant invertible coefficient
block on some ``r`` even and ``s`` odd source coordinates) the level set is
solved explicitly, giving a chart of ``Z``, the immersion ``j: Z -> X`` and
the restriction ``psi_hat: Z -> W``.  Otherwise the result keeps only the
defining submersions and pointwise submersion certificates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction

from . import grassmann, symcore
from .calculus import classify, exact_rank, rank_pair, tangent_matrix
from .charts import (
    AdaptedChart,
    Submanifold,
    keep_projection,
    projection,
    projection_after_chart,
    w_inclusion,
)
from .errors import (
    DomainMismatchError,
    EvaluationError,
    NoChartError,
    NonTransversalError,
    NotAffineError,
    NotOnFiberError,
    OracleDisagreementError,
)
from .geometry import (
    EvenPoint,
    SuperDomain,
    SuperMorphism,
    compose,
    make_morphism,
    reduced_map_eval,
    same_morphism,
)
from .grassmann import SuperFunction
from .symcore import Number
from .transversality import Grid, check_transversal

__all__ = [
    "DefiningSubmersion",
    "OverlapEvidence",
    "PreimageChart",
    "PreimageResult",
    "SubmersionEvidence",
    "codim_check",
    "construct_preimage_affine",
    "defining_submersion",
    "overlap_consistency",
    "projection",
    "projection_after_chart",
    "solved_set_on_grid",
    "verify_submersion_on_fiber",
]


@dataclass(frozen=True)
class DefiningSubmersion:
    chart_index: int
    Psi: SuperMorphism  # V_y -> R^{r|s}
    v_box: tuple | None  # None: no bound available (unbounded source)
    v_empty: bool = False
    fiber_points: tuple = ()


@dataclass(frozen=True)
class SubmersionEvidence:
    chart_index: int
    records: tuple  # ((point, (rank_even, rank_odd), classification), ...)
    witness: tuple | None  # first point where Psi is not a submersion

    @property
    def passed(self) -> bool:
        return self.witness is None


@dataclass(frozen=True)
class PreimageChart:
    chart_index: int
    domain: SuperDomain  # Z_y, coordinates = unsolved source coordinates
    j: SuperMorphism  # Z_y -> X
    psi_hat: SuperMorphism  # Z_y -> W (chart coordinates)
    solved_even: tuple[str, ...]
    solved_odd: tuple[str, ...]
    level_set_exact: bool  # Psi o j == 0
    diagram_commutes: bool  # i o psi_hat == psi o j

    def equations(self) -> list[str]:
        return [f"{c} = {self.j.image_of(c)}" for c in self.solved_even + self.solved_odd]


@dataclass(frozen=True)
class OverlapEvidence:
    records: tuple  # ((chart_a, chart_b, point, passed), ...)
    witness: tuple | None  # (chart_a, chart_b, point)

    @property
    def passed(self) -> bool:
        return self.witness is None


@dataclass(frozen=True)
class PreimageResult:
    psi: SuperMorphism
    W: Submanifold
    submersions: tuple[DefiningSubmersion, ...]
    codim: tuple[int, int]
    charts: tuple[PreimageChart, ...] | None
    fallback_reason: str | None = None
    submersion_evidence: tuple[SubmersionEvidence, ...] = ()
    transversality: object | None = field(default=None, compare=False)

    @property
    def affine(self) -> bool:
        return self.charts is not None


# defining submersions -------------------------------------------------------


def _bisect(box, k):
    lo, hi = box[k]
    mid = (lo + hi) / 2
    return box[:k] + ((lo, mid),) + box[k + 1 :], box[:k] + ((mid, hi),) + box[k + 1 :]


def _image_meets(psi: SuperMorphism, chart: AdaptedChart, box) -> bool:
    ivs = {v: (float(lo), float(hi)) for v, (lo, hi) in zip(psi.source.even, box)}
    for f, (clo, chi) in zip(psi.even_images, chart.box):
        try:
            lo, hi = symcore.eval_interval(grassmann.reduce(f), ivs)
        except (EvaluationError, ZeroDivisionError, OverflowError):
            continue
        if hi < float(clo) - 1e-12 or lo > float(chi) + 1e-12:
            return False
    return True


def preimage_box(psi: SuperMorphism, chart: AdaptedChart, depth: int = 8, max_boxes: int = 256):
    """Conservative box around ``psi~^-1(chart box)`` inside the source box.

    Returns ``(box, empty)``; ``box`` is ``None`` when the source is unbounded.
    """
    src = psi.source.box
    if src is None:
        return None, False
    if chart.box is None or not src:
        return src, False
    boxes = [src] if _image_meets(psi, chart, src) else []
    for _ in range(depth):
        if not boxes or len(boxes) * 2 > max_boxes:
            break
        nxt = []
        for b in boxes:
            k = max(range(len(b)), key=lambda i: b[i][1] - b[i][0])
            nxt.extend(h for h in _bisect(b, k) if _image_meets(psi, chart, h))
        boxes = nxt
    if not boxes:
        return None, True
    hull = tuple(
        (min(b[i][0] for b in boxes), max(b[i][1] for b in boxes)) for i in range(len(src))
    )
    return hull, False


def defining_submersion(psi: SuperMorphism, chart: AdaptedChart, chart_index: int = 0) -> DefiningSubmersion:
    """``Psi = (Pr o phi) o psi`` on the conservative box ``V_y``."""
    if psi.target != chart.ambient:
        raise DomainMismatchError(
            f"morphism lands in {psi.target.name} ({psi.target.dim}), chart lives on "
            f"{chart.ambient.name} ({chart.ambient.dim})"
        )
    Psi = compose(projection_after_chart(chart), psi)
    box, empty = preimage_box(psi, chart)
    return DefiningSubmersion(chart_index, Psi, box, empty)


def _residual(Psi: SuperMorphism, p: EvenPoint) -> list[Number]:
    return [symcore.eval_expr(grassmann.reduce(f), p) for f in Psi.even_images]


def verify_submersion_on_fiber(
    ds: DefiningSubmersion, pts, tol: float = symcore.NUMERIC_TOL
) -> SubmersionEvidence:
    """Classify ``Psi`` at each fiber point; the first failure is the witness."""
    records = []
    witness = None
    for p in pts:
        if not all(symcore.is_zero_value(v, tol) for v in _residual(ds.Psi, p)):
            raise NotOnFiberError(f"point {symcore.format_point(p)} is not on the level set Psi = 0")
        tm = tangent_matrix(ds.Psi, p)
        verdict = classify(ds.Psi, p)
        records.append((tm.basepoint, rank_pair(tm), verdict))
        if witness is None and not verdict.is_submersion:
            witness = tm.basepoint
    return SubmersionEvidence(ds.chart_index, tuple(records), witness)


# affine solving --------------------------------------------------------------


def _constant(f: SuperFunction) -> Fraction | None:
    if f.is_zero():
        return Fraction(0)
    if len(f.terms) == 1 and f.terms[0][0] == () and f.terms[0][1].is_constant():
        return f.terms[0][1].constant_value()
    return None


def _solve_linear(coeffs: list[list[Fraction]], rhs: list[SuperFunction]) -> list[SuperFunction]:
    """Gauss-Jordan solve of ``coeffs . u = rhs`` with exact pivots and superfunction right-hand sides."""
    n = len(coeffs)
    a = [list(row) for row in coeffs]
    b = list(rhs)
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        b[col], b[piv] = b[piv], b[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        b[col] = b[col] * inv
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                b[r] = b[r] - b[col] * f
    return b


def _combination(X: SuperDomain, names, coeffs) -> SuperFunction:
    out = SuperFunction.scalar(X.context, 0)
    for v, c in zip(names, coeffs):
        out = out + c * X.coordinate(v)
    return out


def _subsets(coords, r):
    # ordered so that the kept complement is lexicographically first
    return reversed(list(itertools.combinations(coords, r)))


def _pick_even(Psi: SuperMorphism):
    X = Psi.source
    F = Psi.even_images
    r = len(F)
    if r == 0:
        return (), []
    for S in _subsets(X.even, r):
        block = []
        for f in F:
            row = [_constant(grassmann.d_even(f, v)) for v in S]
            if any(c is None for c in row):
                break
            block.append(row)
        else:
            if exact_rank(tuple(tuple(row) for row in block)) < r:
                continue
            rest = [f - _combination(X, S, row) for f, row in zip(F, block)]
            if any(v in c.variables for g in rest for _, c in g.terms for v in S):
                continue
            return S, _solve_linear(block, [-g for g in rest])
    raise NotAffineError("no even coordinate subset with a constant invertible coefficient block")


def _pick_odd(Psi: SuperMorphism):
    X = Psi.source
    G = Psi.odd_images
    s = len(G)
    if s == 0:
        return (), []
    for g in G:
        if any(len(I) != 1 for I, _ in g.terms):
            raise NotAffineError(f"odd component {g} has terms of odd degree other than 1")
    for S in _subsets(X.odd, s):
        block = []
        for g in G:
            row = [_constant(grassmann.d_odd(g, v)) for v in S]
            if any(c is None for c in row):
                break
            block.append(row)
        else:
            if exact_rank(tuple(tuple(row) for row in block)) < s:
                continue
            rest = [g - _combination(X, S, row) for g, row in zip(G, block)]
            return S, _solve_linear(block, [-h for h in rest])
    raise NotAffineError("no odd coordinate subset with a constant invertible coefficient block")


def _uses(f: SuperFunction, evens, odds) -> bool:
    ctx = f.context
    odd_idx = {ctx.odd.index(v) + 1 for v in odds}
    for I, c in f.terms:
        if odd_idx.intersection(I) or any(v in c.variables for v in evens):
            return True
    return False


def _restrict(f: SuperFunction, Z: SuperDomain) -> SuperFunction:
    """Re-home a section over X that only involves Z's coordinates."""
    X_odd = f.context.odd
    remap = {X_odd.index(v) + 1: Z.odd.index(v) + 1 for v in Z.odd}
    terms = tuple((tuple(remap[i] for i in I), c) for I, c in f.terms)
    return SuperFunction(Z.context, terms)


def _solve_chart(psi: SuperMorphism, chart: AdaptedChart, k: int, ds: DefiningSubmersion, W: Submanifold) -> PreimageChart:
    Psi = ds.Psi
    X = psi.source
    S_even, sol_even = _pick_even(Psi)
    S_odd, sol_odd = _pick_odd(Psi)
    solved = dict(zip(S_even + S_odd, sol_even + sol_odd))
    # nilpotent cross terms can mention solved coordinates; substitute to a fixed point
    images = {c: solved.get(c, X.coordinate(c)) for c in X.even + X.odd}
    for _ in range(len(X.odd) + 3):
        if not any(_uses(images[c], S_even, S_odd) for c in solved):
            break
        ev = [images[c] for c in X.even]
        od = [images[c] for c in X.odd]
        images = {c: grassmann.substitute(images[c], ev, od) for c in images}
    else:
        raise NotAffineError("solved coordinates did not decouple")
    if any(_uses(images[c], S_even, S_odd) for c in solved):
        raise NotAffineError("solved coordinates did not decouple")
    keep_even = tuple(v for v in X.even if v not in S_even)
    keep_odd = tuple(v for v in X.odd if v not in S_odd)
    zbox = None
    if X.box is not None:
        zbox = tuple(iv for v, iv in zip(X.even, X.box) if v in keep_even)
    Z = SuperDomain(f"Z{k}", keep_even, keep_odd, zbox)
    j = make_morphism(
        Z,
        X,
        [_restrict(images[c], Z) for c in X.even],
        [_restrict(images[c], Z) for c in X.odd],
        f"j{k}",
    )
    level = compose(Psi, j)
    level_exact = all(symcore.probably_zero(c) for f in level.images for _, c in f.terms)
    psi_j = compose(psi, j)
    w_dom = chart.w_domain()
    keep = keep_projection(chart.chart_domain, chart.keep_even, chart.keep_odd, w_dom)
    psi_hat = compose(compose(keep, chart.phi), psi_j)
    commutes = same_morphism(compose(w_inclusion(chart), psi_hat), psi_j)
    return PreimageChart(k, Z, j, psi_hat, S_even, S_odd, level_exact, commutes)


def construct_preimage_affine(
    psi: SuperMorphism,
    W: Submanifold,
    grid: Grid | None = None,
    points=None,
    tol: float = symcore.NUMERIC_TOL,
) -> PreimageResult:
    """Build ``Z = psi^-1(W)`` chart by chart.

    With ``grid`` or ``points`` the input is first checked for
    transversality (a negative verdict raises :class:`NonTransversalError`)
    and the defining submersions are certified at the fiber points found.
    A non-affine ``Psi`` yields a fallback result with ``charts=None``.
    """
    if psi.target != W.ambient:
        raise DomainMismatchError(f"{psi.target.name} is not the ambient domain of {W.name}")
    report = None
    if grid is not None or points is not None:
        report = check_transversal(psi, W, points=points, grid=grid, tol=tol)
        if not report.agreement:
            raise OracleDisagreementError("transversality criteria disagree")
        if not report.transversal:
            bad = report.failures()[0]
            raise NonTransversalError(f"psi is not transversal to {W.name} at {symcore.format_point(bad.point)}")
    subs = [defining_submersion(psi, c, k) for k, c in enumerate(W.charts)]
    evidence = []
    if report is not None:
        for k, ds in enumerate(subs):
            pts = tuple(r.point for r in report.records if r.chart == k)
            evidence.append(verify_submersion_on_fiber(ds, [dict(p) for p in pts], tol))
            subs[k] = replace(ds, fiber_points=pts)
    charts = []
    reason = None
    try:
        for k, (chart, ds) in enumerate(zip(W.charts, subs)):
            charts.append(_solve_chart(psi, chart, k, ds, W))
    except NotAffineError as exc:
        reason = f"chart {len(charts)}: {exc}"
    return PreimageResult(
        psi,
        W,
        tuple(subs),
        W.codim,
        None if reason else tuple(charts),
        reason,
        tuple(evidence),
        report,
    )


# checks on the constructed object -------------------------------------------------


def codim_check(result: PreimageResult, W: Submanifold) -> bool:
    """``codim_X Z == codim_Y W == (r, s)`` for every constructed chart."""
    if result.charts is None:
        raise NotAffineError("codimension check needs explicit charts")
    X = result.psi.source
    w_codim = W.codim
    if result.codim != w_codim:
        return False
    for pc in result.charts:
        z = (len(X.even) - len(pc.domain.even), len(X.odd) - len(pc.domain.odd))
        if z != w_codim:
            return False
    return True


def _on_chart(pc: PreimageChart, x: EvenPoint, tol: float) -> bool:
    z = {v: x[v] for v in pc.domain.even}
    for c in pc.solved_even:
        want = symcore.eval_expr(grassmann.reduce(pc.j.image_of(c)), z)
        if not symcore.is_close(x[c], want, tol):
            return False
    return True


def solved_set_on_grid(result: PreimageResult, grid: Grid, tol: float = symcore.NUMERIC_TOL) -> list[dict]:
    """Grid points lying on some solved chart of ``Z`` (inside that chart's box)."""
    if result.charts is None:
        raise NotAffineError("no explicit charts")
    X = result.psi.source
    out = []
    for x in grid.points(X.even):
        if not X.contains(x):
            continue
        for pc in result.charts:
            chart = result.W.charts[pc.chart_index]
            try:
                if _on_chart(pc, x, tol) and chart.contains(reduced_map_eval(result.psi, x), tol):
                    out.append(x)
                    break
            except EvaluationError:
                continue
    return out


def _values_close(a: SuperFunction, b: SuperFunction, z: EvenPoint, tol: float) -> bool:
    va, vb = grassmann.evaluate(a, z), grassmann.evaluate(b, z)
    for I in set(va) | set(vb):
        if not symcore.is_close(va.get(I, Fraction(0)), vb.get(I, Fraction(0)), tol):
            return False
    return True


def overlap_consistency(result: PreimageResult, samples, tol: float = symcore.NUMERIC_TOL) -> OverlapEvidence:
    """Check that overlapping chart presentations of ``Z`` glue.

    For charts ``a < b`` and a sample ``x`` on ``Z_a`` whose image lies in both
    chart boxes, the transition ``f_ab = proj_b o j_a`` must satisfy
    ``j_a = j_b o f_ab`` on every coordinate generator at ``x``.
    """
    if result.charts is None:
        raise NotAffineError("overlap check needs explicit charts")
    if len(result.charts) < 2:
        raise NoChartError("overlap check needs at least two charts")
    X = result.psi.source
    records = []
    witness = None
    for a, b in itertools.combinations(range(len(result.charts)), 2):
        pa, pb = result.charts[a], result.charts[b]
        ca, cb = result.W.charts[pa.chart_index], result.W.charts[pb.chart_index]
        proj_b = make_morphism(X, pb.domain, [X.coordinate(v) for v in pb.domain.even], [X.coordinate(v) for v in pb.domain.odd])
        f_ab = compose(proj_b, pa.j)
        glued = compose(pb.j, f_ab)
        for x in samples:
            y = reduced_map_eval(result.psi, x, check_box=False)
            if not (ca.contains(y, tol) and cb.contains(y, tol)):
                raise NoChartError(f"charts {a} and {b} do not overlap at {symcore.format_point(x)}")
            if not _on_chart(pa, x, tol):
                raise NotOnFiberError(f"sample {symcore.format_point(x)} is not on chart {a} of Z")
            z = {v: x[v] for v in pa.domain.even}
            ok = all(_values_close(u, v, z, tol) for u, v in zip(pa.j.images, glued.images))
            point = tuple((v, x[v]) for v in X.even)
            records.append((a, b, point, ok))
            if not ok and witness is None:
                witness = (a, b, point)
    return OverlapEvidence(tuple(records), witness)
