"""Pointwise super transversality with two independent criteria, fiber
discovery on grids, and the per-point report."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import grassmann, symcore
from .calculus import classify, matrix_rank, rank_pair, tangent_matrix
from .charts import AdaptedChart, Submanifold, projection_after_chart
from .errors import EvaluationError, OutOfBoxError
from .geometry import EvenPoint, SuperMorphism, compose, reduced_map_eval
from .symcore import Number


@dataclass(frozen=True)
class Grid:
    """Axis-aligned grid: one closed interval per even source coordinate and a common step."""

    intervals: tuple  # tuple[tuple[Fraction, Fraction], ...]
    step: Fraction

    def __post_init__(self):
        object.__setattr__(self, "intervals", tuple((Fraction(a), Fraction(b)) for a, b in self.intervals))
        object.__setattr__(self, "step", Fraction(self.step))
        if self.step <= 0:
            raise ValueError("grid step must be positive")

    @classmethod
    def uniform(cls, lo, hi, step, dim: int) -> Grid:
        return cls(tuple((Fraction(lo), Fraction(hi)) for _ in range(dim)), Fraction(step))

    def axes(self) -> list[list[Fraction]]:
        out = []
        for lo, hi in self.intervals:
            n = int((hi - lo) / self.step)
            out.append([lo + k * self.step for k in range(n + 1)])
        return out

    def points(self, names) -> list[dict[str, Fraction]]:
        if len(names) != len(self.intervals):
            raise ValueError(f"grid has {len(self.intervals)} axes but the domain has {len(names)} even coordinates")
        return [dict(zip(names, combo)) for combo in itertools.product(*self.axes())]


def _dedupe_key(p: EvenPoint, names) -> tuple:
    return tuple(round(float(p[v]), 7) + 0.0 for v in names)


@dataclass(frozen=True)
class PointVerdict:
    point: tuple  # ((name, value), ...) in source order
    chart: int
    ranks_even: int
    ranks_odd: int
    transversal: bool


def _locate(psi: SuperMorphism, W: Submanifold, p: EvenPoint, tol: float) -> int:
    y = reduced_map_eval(psi, p)
    return W.locate(y, tol)


def _basis_columns(n_rows: int, k: int) -> list[list[Fraction]]:
    return [[Fraction(1) if i == j else Fraction(0) for j in range(k)] for i in range(n_rows)]


def _hstack(m, extra) -> tuple:
    return tuple(tuple(row) + tuple(ex) for row, ex in zip(m, extra)) if m else tuple(tuple(ex) for ex in extra)


def is_transversal_at(
    psi: SuperMorphism, W: Submanifold, p: EvenPoint, tol: float = symcore.NUMERIC_TOL
) -> PointVerdict:
    """``Im d psi_x + T_y W = T_y Y`` tested in adapted chart coordinates:
    the span of ``d(phi o psi)_x`` together with the first ``p`` (resp. ``q``)
    coordinate vectors must fill the even (resp. odd) sector."""
    k = _locate(psi, W, p, tol)
    chart = W.charts[k]
    M = tangent_matrix(compose(chart.phi, psi), p)
    Y = W.ambient
    n_even, n_odd = len(Y.even), len(Y.odd)
    even = _hstack(M.even_block, _basis_columns(n_even, chart.keep_even)) if n_even else ()
    odd = _hstack(M.odd_block, _basis_columns(n_odd, chart.keep_odd)) if n_odd else ()
    re_, ro = matrix_rank(even), matrix_rank(odd)
    return PointVerdict(M.basepoint, k, re_, ro, re_ == n_even and ro == n_odd)


def is_transversal_via_projection(
    psi: SuperMorphism, W: Submanifold, p: EvenPoint, tol: float = symcore.NUMERIC_TOL
) -> PointVerdict:
    """Transversal iff ``Pr o phi o psi`` is a submersion at ``p``."""
    k = _locate(psi, W, p, tol)
    Psi = compose(projection_after_chart(W.charts[k]), psi)
    tm = tangent_matrix(Psi, p)
    re_, ro = rank_pair(tm)
    verdict = classify(Psi, p).is_submersion
    return PointVerdict(tm.basepoint, k, re_, ro, verdict)


# fiber discovery ---------------------------------------------------------


def _residual_exprs(psi: SuperMorphism, chart: AdaptedChart) -> list[symcore.Expr]:
    """Reduced killed components of ``phi o psi``: the chart's W-equations pulled back to X."""
    comp = compose(chart.phi, psi)
    return [grassmann.reduce(f) for f in comp.even_images[chart.keep_even :]]


def _newton(residuals, jac, names, start: dict, tol: float, max_iter: int = 30) -> dict | None:
    x = np.array([float(start[v]) for v in names])
    for _ in range(max_iter):
        pt = dict(zip(names, x.tolist()))
        try:
            r = np.array([float(symcore.eval_expr(e, pt)) for e in residuals])
        except EvaluationError:
            return None
        if np.max(np.abs(r), initial=0.0) <= tol * 1e-2:
            return pt
        try:
            J = np.array([[float(symcore.eval_expr(d, pt)) for d in row] for row in jac])
        except EvaluationError:
            return None
        step, *_ = np.linalg.lstsq(J, -r, rcond=None)
        x = x + step
        if not np.all(np.isfinite(x)):
            return None
    pt = dict(zip(names, x.tolist()))
    try:
        if max(abs(float(symcore.eval_expr(e, pt))) for e in residuals) <= tol:
            return pt
    except EvaluationError:
        pass
    return None


def scan_preimage(
    psi: SuperMorphism, W: Submanifold, grid: Grid, tol: float = symcore.NUMERIC_TOL
) -> list[dict[str, Number]]:
    """Fiber points ``psi~(x) in W`` found on ``grid``.

    Polynomial data is scanned exactly on the grid.  Otherwise grid points
    seed a least-squares Newton iteration and every converged point is
    re-verified by direct evaluation.
    """
    names = psi.source.even
    candidates = [x for x in grid.points(names) if psi.source.contains(x)]
    found: dict[tuple, dict] = {}
    for chart in W.charts:
        residuals = _residual_exprs(psi, chart)
        exact = all(e.is_polynomial() for e in residuals) and all(
            grassmann.reduce(f).is_polynomial() for f in psi.even_images
        )
        if exact:
            for x in candidates:
                if not all(symcore.eval_expr(e, x) == 0 for e in residuals):
                    continue
                if chart.contains(reduced_map_eval(psi, x)):
                    found.setdefault(_dedupe_key(x, names), x)
            continue
        jac = [[symcore.diff_even(e, v) for v in names] for e in residuals]
        for x in candidates:
            refined = x if not residuals else _newton(residuals, jac, names, x, tol)
            if refined is None:
                continue
            try:
                if not psi.source.contains(refined) or not _on_fiber(psi, W, refined, tol):
                    continue
            except (EvaluationError, OutOfBoxError):
                continue
            found.setdefault(_dedupe_key(refined, names), refined)
    return [found[key] for key in sorted(found)]


def _on_fiber(psi: SuperMorphism, W: Submanifold, x: EvenPoint, tol: float) -> bool:
    y = reduced_map_eval(psi, x)
    return bool(W.charts_at(y, tol))


# reports ------------------------------------------------------------------


@dataclass(frozen=True)
class PointRecord:
    point: tuple
    chart: int
    ranks_even: int
    ranks_odd: int
    verdict: bool
    projection_ranks: tuple[int, int]
    projection_verdict: bool

    @property
    def agreement(self) -> bool:
        return self.verdict == self.projection_verdict

    @property
    def coords(self) -> tuple:
        return tuple(v for _, v in self.point)


@dataclass(frozen=True)
class TransversalityReport:
    records: tuple[PointRecord, ...]
    mode: str  # "sampled" (grid scan) or "pointwise" (explicit points)

    @property
    def transversal(self) -> bool:
        return all(r.verdict for r in self.records)

    @property
    def agreement(self) -> bool:
        return all(r.agreement for r in self.records)

    @property
    def fiber_size(self) -> int:
        return len(self.records)

    def failures(self) -> list[PointRecord]:
        return [r for r in self.records if not r.verdict]


def check_point(psi: SuperMorphism, W: Submanifold, p: EvenPoint, tol: float = symcore.NUMERIC_TOL) -> PointRecord:
    a = is_transversal_at(psi, W, p, tol)
    b = is_transversal_via_projection(psi, W, p, tol)
    return PointRecord(a.point, a.chart, a.ranks_even, a.ranks_odd, a.transversal, (b.ranks_even, b.ranks_odd), b.transversal)


def check_transversal(
    psi: SuperMorphism,
    W: Submanifold,
    points: list[EvenPoint] | None = None,
    grid: Grid | None = None,
    tol: float = symcore.NUMERIC_TOL,
) -> TransversalityReport:
    """Run both criteria at every fiber point.

    With ``grid`` the fiber is discovered by :func:`scan_preimage` (verdict
    labelled ``"sampled"``); explicit ``points`` must all lie on the fiber.
    An empty fiber is vacuously transversal.
    """
    if (points is None) == (grid is None):
        raise ValueError("give exactly one of points or grid")
    if grid is not None:
        pts = scan_preimage(psi, W, grid, tol)
        mode = "sampled"
    else:
        pts = list(points)
        mode = "pointwise"
    records = [check_point(psi, W, p, tol) for p in pts]
    records.sort(key=lambda r: tuple(float(v) for v in r.coords) + tuple(str(v) for v in r.coords))
    return TransversalityReport(tuple(records), mode)
