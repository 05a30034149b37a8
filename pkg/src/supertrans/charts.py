"""Adapted charts for a subsupermanifold ``W`` of ``Y`` and the projections
built from them.

In an adapted chart ``phi: U -> R^{p+r|q+s}`` the submanifold is cut out by
the last ``r`` even and last ``s`` odd chart coordinates; the first ``p``
even and ``q`` odd coordinates are kept as coordinates on ``W``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

from . import grassmann, symcore
from .calculus import classify
from .errors import (
    EvaluationError,
    InvertibilityError,
    NoChartError,
    NotOnFiberError,
    OutOfBoxError,
    SceneError,
)
from .geometry import (
    EvenPoint,
    SuperDomain,
    SuperMorphism,
    compose,
    identity,
    make_morphism,
    same_morphism,
)
from .grassmann import SuperFunction
from .symcore import Number


def _in_box(box, names, point: EvenPoint, tol: float) -> bool:
    if box is None:
        return True
    for v, (lo, hi) in zip(names, box):
        x = point[v]
        if isinstance(x, float):
            if x < lo - tol or x > hi + tol:
                return False
        elif x < lo or x > hi:
            return False
    return True


@dataclass(frozen=True)
class AdaptedChart:
    phi: SuperMorphism  # Y -> standard chart domain
    keep_even: int
    keep_odd: int
    inverse: SuperMorphism | None = None
    box: tuple | None = None  # closed intervals over Y's even coordinates

    def __post_init__(self):
        Y, C = self.phi.source, self.phi.target
        if C.dim != Y.dim:
            raise SceneError(f"chart map must be square, got {Y.dim} -> {C.dim}")
        if not (0 <= self.keep_even <= Y.dim.even and 0 <= self.keep_odd <= Y.dim.odd):
            raise SceneError(f"kept counts {self.keep_even}|{self.keep_odd} exceed {Y.dim}")
        if self.box is not None:
            box = tuple((Fraction(lo), Fraction(hi)) for lo, hi in self.box)
            if len(box) != Y.dim.even:
                raise SceneError("chart box needs one interval per even coordinate of the ambient domain")
            object.__setattr__(self, "box", box)
        if self.inverse is not None:
            inv = self.inverse
            if inv.source != C or inv.target != Y:
                raise InvertibilityError("chart inverse must map the chart domain back to the ambient domain")
            if not same_morphism(compose(self.phi, inv), identity(C)):
                raise InvertibilityError("phi o inverse is not the identity")
            if not same_morphism(compose(inv, self.phi), identity(Y)):
                raise InvertibilityError("inverse o phi is not the identity")

    @property
    def ambient(self) -> SuperDomain:
        return self.phi.source

    @property
    def chart_domain(self) -> SuperDomain:
        return self.phi.target

    @property
    def codim(self) -> tuple[int, int]:
        d = self.ambient.dim
        return d.even - self.keep_even, d.odd - self.keep_odd

    @cached_property
    def defining_functions(self) -> tuple[tuple[SuperFunction, ...], tuple[SuperFunction, ...]]:
        """The killed chart components: ``W = {these vanish}``."""
        return self.phi.even_images[self.keep_even :], self.phi.odd_images[self.keep_odd :]

    def contains(self, y: EvenPoint, tol: float = symcore.NUMERIC_TOL) -> bool:
        return _in_box(self.box, self.ambient.even, y, tol)

    def w_residuals(self, y: EvenPoint) -> list[Number]:
        """Reduced values of the killed even chart components at ``y``."""
        return [symcore.eval_expr(grassmann.reduce(f), y) for f in self.defining_functions[0]]

    def on_w(self, y: EvenPoint, tol: float = symcore.NUMERIC_TOL) -> bool:
        try:
            return all(symcore.is_zero_value(v, tol) for v in self.w_residuals(y))
        except EvaluationError:
            return False

    def w_domain(self) -> SuperDomain:
        C = self.chart_domain
        return SuperDomain(f"{C.name}|W", C.even[: self.keep_even], C.odd[: self.keep_odd])


@dataclass(frozen=True)
class Submanifold:
    ambient: SuperDomain
    charts: tuple[AdaptedChart, ...]
    name: str = "W"

    def __post_init__(self):
        if not self.charts:
            raise SceneError(f"submanifold {self.name} needs at least one chart")
        kept = {(c.keep_even, c.keep_odd) for c in self.charts}
        if len(kept) != 1:
            raise SceneError(f"submanifold {self.name}: charts disagree on the kept dimensions {sorted(kept)}")
        for c in self.charts:
            if c.ambient != self.ambient:
                raise SceneError(f"submanifold {self.name}: chart map does not start at {self.ambient.name}")

    @property
    def dim(self) -> tuple[int, int]:
        return self.charts[0].keep_even, self.charts[0].keep_odd

    @property
    def codim(self) -> tuple[int, int]:
        return self.charts[0].codim

    def locate(self, y: EvenPoint, tol: float = symcore.NUMERIC_TOL) -> int:
        """Index of the first chart whose box holds ``y`` and in which ``y`` lies on W."""
        in_box = [k for k, c in enumerate(self.charts) if c.contains(y, tol)]
        if not in_box:
            raise NoChartError(f"point {symcore.format_point(y)} lies in no chart of {self.name}")
        for k in in_box:
            if self.charts[k].on_w(y, tol):
                return k
        raise NotOnFiberError(f"point {symcore.format_point(y)} is not on {self.name}")

    def charts_at(self, y: EvenPoint, tol: float = symcore.NUMERIC_TOL) -> list[int]:
        return [k for k, c in enumerate(self.charts) if c.contains(y, tol) and c.on_w(y, tol)]


def standard_domain(name: str, m: int, n: int) -> SuperDomain:
    return SuperDomain.standard(name, m, n, "t", "e")


def projection(chart_domain: SuperDomain, keep_even: int, keep_odd: int) -> SuperMorphism:
    """``Pr``: forget the first ``p`` even and ``q`` odd coordinates and keep the rest.

    The target is a standard ``R^{r|s}`` with coordinates ``t1.. ; e1..``.
    """
    ev, od = chart_domain.even[keep_even:], chart_domain.odd[keep_odd:]
    target = standard_domain("R", len(ev), len(od))
    return make_morphism(
        chart_domain,
        target,
        [chart_domain.coordinate(v) for v in ev],
        [chart_domain.coordinate(v) for v in od],
        "Pr",
    )


def keep_projection(chart_domain: SuperDomain, keep_even: int, keep_odd: int, w_domain: SuperDomain):
    """Complementary projection onto the kept coordinates (chart coordinates of W)."""
    return make_morphism(
        chart_domain,
        w_domain,
        [chart_domain.coordinate(v) for v in chart_domain.even[:keep_even]],
        [chart_domain.coordinate(v) for v in chart_domain.odd[:keep_odd]],
        "keep",
    )


def w_inclusion_model(chart: AdaptedChart) -> SuperMorphism:
    """The local-model immersion ``R^{p|q} -> R^{p+r|q+s}`` (kept coordinates
    map to themselves, killed ones to 0)."""
    W = chart.w_domain()
    C = chart.chart_domain
    zero = SuperFunction.scalar(W.context, 0)
    even = [W.coordinate(v) for v in W.even] + [zero] * (len(C.even) - len(W.even))
    odd = [W.coordinate(v) for v in W.odd] + [zero] * (len(C.odd) - len(W.odd))
    return make_morphism(W, C, even, odd, "i_model")


def w_inclusion(chart: AdaptedChart) -> SuperMorphism:
    """``i = phi^-1 o i_model: W|U -> Y``."""
    if chart.inverse is None:
        raise InvertibilityError("chart has no inverse certificate")
    return compose(chart.inverse, w_inclusion_model(chart))


def _box_samples(box, names, per_axis: int = 3, limit: int = 64) -> list[dict[str, Fraction]]:
    if box is None:
        axes = [[Fraction(-1), Fraction(0), Fraction(1)] for _ in names]
    else:
        axes = []
        for lo, hi in box:
            if per_axis == 1 or lo == hi:
                axes.append([(lo + hi) / 2])
            else:
                axes.append([lo + (hi - lo) * k / (per_axis - 1) for k in range(per_axis)])
    pts = []
    for combo in itertools.product(*axes):
        pts.append(dict(zip(names, combo)))
        if len(pts) >= limit:
            break
    return pts


@lru_cache(maxsize=256)
def projection_after_chart(chart: AdaptedChart, check: bool = True) -> SuperMorphism:
    """``g = Pr o phi``; with ``check`` it is classified at a sample grid of
    the chart box and must be a submersion everywhere it is defined."""
    if chart.inverse is None:
        raise InvertibilityError("chart has no inverse certificate")
    g = compose(projection(chart.chart_domain, chart.keep_even, chart.keep_odd), chart.phi)
    if check:
        for y in _box_samples(chart.box, chart.ambient.even):
            try:
                verdict = classify(g, y)
            except (EvaluationError, OutOfBoxError):
                continue
            if not verdict.is_submersion:
                raise InvertibilityError(f"Pr o phi is not a submersion at {symcore.format_point(y)}")
    return g
