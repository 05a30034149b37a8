"""Superdomains and supermorphisms given by coordinate pullbacks.

A morphism ``psi: X -> Y`` is stored as the images ``psi^*(y^a)`` (even) and
``psi^*(theta^b)`` (odd) of the target coordinates; since this data
determines the morphism uniquely, two morphisms are equal exactly when their
normalized image lists are.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from . import grassmann, symcore
from .errors import DomainMismatchError, OutOfBoxError, ParityError
from .grassmann import Context, Parity, SuperFunction
from .symcore import Number

EvenPoint = Mapping[str, Number]
Box = tuple  # tuple[tuple[Fraction, Fraction], ...], one closed interval per even coordinate


@dataclass(frozen=True)
class SuperDim:
    even: int
    odd: int

    def __post_init__(self):
        if self.even < 0 or self.odd < 0:
            raise ValueError("dimensions must be non-negative")

    def __str__(self) -> str:
        return f"{self.even}|{self.odd}"


@dataclass(frozen=True)
class SuperDomain:
    name: str
    even: tuple[str, ...]
    odd: tuple[str, ...]
    box: Box | None = None

    def __post_init__(self):
        object.__setattr__(self, "even", tuple(self.even))
        object.__setattr__(self, "odd", tuple(self.odd))
        names = self.even + self.odd
        if len(set(names)) != len(names):
            raise ValueError(f"{self.name}: coordinate names must be distinct")
        if self.box is not None:
            box = tuple((Fraction(lo), Fraction(hi)) for lo, hi in self.box)
            if len(box) != len(self.even):
                raise ValueError(f"{self.name}: box needs one interval per even coordinate")
            if any(lo > hi for lo, hi in box):
                raise ValueError(f"{self.name}: empty box interval")
            object.__setattr__(self, "box", box)

    @classmethod
    def standard(cls, name: str, m: int, n: int, even_prefix: str = "x", odd_prefix: str = "xi", box=None):
        return cls(
            name,
            tuple(f"{even_prefix}{i}" for i in range(1, m + 1)),
            tuple(f"{odd_prefix}{j}" for j in range(1, n + 1)),
            box,
        )

    @property
    def dim(self) -> SuperDim:
        return SuperDim(len(self.even), len(self.odd))

    @property
    def context(self) -> Context:
        return Context(self.even, self.odd)

    def coordinate(self, name: str) -> SuperFunction:
        return SuperFunction.coordinate(self.context, name)

    def parse(self, text: str) -> SuperFunction:
        return grassmann.parse_superfunction(text, self.context)

    def contains(self, point: EvenPoint, tol: float = symcore.NUMERIC_TOL) -> bool:
        if self.box is None:
            return True
        for v, (lo, hi) in zip(self.even, self.box):
            x = point[v]
            if isinstance(x, float):
                if x < lo - tol or x > hi + tol:
                    return False
            elif x < lo or x > hi:
                return False
        return True

    def point(self, coords: Sequence[Number]) -> dict[str, Number]:
        if len(coords) != len(self.even):
            raise ValueError(f"{self.name} needs {len(self.even)} coordinates, got {len(coords)}")
        return {v: (Fraction(c) if isinstance(c, int) else c) for v, c in zip(self.even, coords)}

    def __str__(self) -> str:
        return f"{self.name}^{self.dim}"


@dataclass(frozen=True)
class SuperMorphism:
    source: SuperDomain
    target: SuperDomain
    even_images: tuple[SuperFunction, ...]
    odd_images: tuple[SuperFunction, ...]
    name: str = field(default="", compare=False)

    @property
    def images(self) -> tuple[SuperFunction, ...]:
        return self.even_images + self.odd_images

    def image_of(self, coord: str) -> SuperFunction:
        names = self.target.even + self.target.odd
        return self.images[names.index(coord)]

    def pullback(self, f: SuperFunction) -> SuperFunction:
        """``psi^* f`` for a section ``f`` over the target."""
        return grassmann.substitute(f, self.even_images, self.odd_images, self.source.context)

    def describe(self) -> dict[str, str]:
        names = self.target.even + self.target.odd
        return {n: str(img) for n, img in zip(names, self.images)}

    def __str__(self) -> str:
        body = "; ".join(f"{k} = {v}" for k, v in self.describe().items())
        return f"{self.name or 'psi'}: {self.source.name} -> {self.target.name} {{{body}}}"


def make_morphism(
    source: SuperDomain,
    target: SuperDomain,
    even_images: Sequence[SuperFunction | str],
    odd_images: Sequence[SuperFunction | str],
    name: str = "",
) -> SuperMorphism:
    """Build the unique morphism with the given coordinate images.

    String images are parsed over the source context.  Raises
    :class:`ParityError` naming the offending coordinate, or
    :class:`ArityError` on a count mismatch.
    """
    ctx = source.context
    ev = tuple(source.parse(f) if isinstance(f, str) else f for f in even_images)
    od = tuple(source.parse(f) if isinstance(f, str) else f for f in odd_images)
    grassmann.check_images(target.context, ev, od)
    for img in ev + od:
        if img.context != ctx:
            raise DomainMismatchError(f"image {img} is not a section over {source.name}")
    return SuperMorphism(source, target, ev, od, name)


def morphism_from_mapping(source: SuperDomain, target: SuperDomain, images: Mapping[str, str], name: str = ""):
    """Build a morphism from ``{target_coordinate: expression}``."""
    missing = [c for c in target.even + target.odd if c not in images]
    if missing:
        raise grassmann.ArityError(f"no image for {', '.join(missing)}")
    extra = [c for c in images if c not in target.even + target.odd]
    if extra:
        raise grassmann.ArityError(f"{', '.join(extra)} not coordinates of {target.name}")
    return make_morphism(
        source, target, [images[c] for c in target.even], [images[c] for c in target.odd], name
    )


def identity(domain: SuperDomain) -> SuperMorphism:
    ctx = domain.context
    return SuperMorphism(
        domain,
        domain,
        tuple(SuperFunction.even_var(ctx, v) for v in domain.even),
        tuple(SuperFunction.odd_var(ctx, v) for v in domain.odd),
        "id",
    )


@lru_cache(maxsize=4096)
def compose(outer: SuperMorphism, inner: SuperMorphism) -> SuperMorphism:
    """``outer o inner``: pull the outer images back along ``inner``."""
    if inner.target != outer.source:
        raise DomainMismatchError(
            f"cannot compose: inner target {inner.target.name} is not outer source {outer.source.name}"
        )
    images = grassmann.substitute_many(
        outer.images, outer.source.context, inner.even_images, inner.odd_images, inner.source.context
    )
    k = len(outer.even_images)
    return SuperMorphism(inner.source, outer.target, tuple(images[:k]), tuple(images[k:]))


def reduced_map_eval(psi: SuperMorphism, p: EvenPoint, check_box: bool = True) -> dict[str, Number]:
    """The underlying point map: evaluate the degree-0 part of each even image."""
    if check_box and not psi.source.contains(p):
        raise OutOfBoxError(f"point {symcore.format_point(p)} lies outside the box of {psi.source.name}")
    return {y: symcore.eval_expr(grassmann.reduce(f), p) for y, f in zip(psi.target.even, psi.even_images)}


def same_morphism(a: SuperMorphism, b: SuperMorphism, tol: float = symcore.NUMERIC_TOL) -> bool:
    """Image-list equality; transcendental differences go through the randomized zero screen."""
    if a.source.context != b.source.context or a.target.context != b.target.context:
        return False
    for fa, fb in zip(a.images, b.images):
        diff = fa - fb
        if not all(symcore.probably_zero(c, tol) for _, c in diff.terms):
            return False
    return True


def require_parity(f: SuperFunction, want: Parity, what: str) -> None:
    if grassmann.parity(f) is not want and not f.is_zero():
        raise ParityError(f"{what} must be {want.value}, got {grassmann.parity(f).value}")
