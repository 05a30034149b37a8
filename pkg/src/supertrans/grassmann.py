"""Superfunctions: the algebra C^inf(V)[xi_1, ..., xi_n].

A :class:`SuperFunction` is a finite sum ``sum_I f_I xi^I`` over increasing
index tuples ``I`` (1-based), with coefficients :class:`~supertrans.symcore.Expr`
in the even variables of its :class:`Context`.  Signs coming from
reordering odd generators are absorbed into the coefficients, so equal
superfunctions have equal term tuples.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction

from . import parsing, symcore
from .errors import (
    ArityError,
    ContextMismatchError,
    EvaluationError,
    ParityError,
    ParseError,
    UnknownVariableError,
)
from .symcore import Expr, Number


@dataclass(frozen=True)
class Context:
    even: tuple[str, ...]
    odd: tuple[str, ...]

    def __post_init__(self):
        names = self.even + self.odd
        if len(set(names)) != len(names):
            raise ValueError(f"coordinate names must be distinct: {names}")

    @property
    def n_odd(self) -> int:
        return len(self.odd)

    def __str__(self) -> str:
        return f"({', '.join(self.even)} | {', '.join(self.odd)})"


class Parity(enum.Enum):
    EVEN = "Even"
    ODD = "Odd"
    MIXED = "Mixed"


def monomial_normalize(indices: Sequence[int], n: int | None = None) -> tuple[int, tuple[int, ...]]:
    """Reorder a product of odd generators ``xi_{i1} ... xi_{ik}``.

    Returns ``(sign, sorted_indices)``; ``sign`` is 0 when an index repeats
    (``xi_i^2 = 0``), otherwise the sign of the sorting permutation.
    """
    if n is not None:
        for i in indices:
            if not 1 <= i <= n:
                raise IndexError(f"odd index {i} out of range 1..{n}")
    if len(set(indices)) != len(indices):
        return 0, ()
    inversions = sum(1 for a in range(len(indices)) for b in range(a + 1, len(indices)) if indices[a] > indices[b])
    return (-1 if inversions % 2 else 1), tuple(sorted(indices))


def _term_order(item) -> tuple:
    return (len(item[0]), item[0])


@dataclass(frozen=True)
class SuperFunction:
    context: Context
    terms: tuple  # tuple[tuple[tuple[int, ...], Expr], ...], no zero coefficients

    @classmethod
    def from_dict(cls, context: Context, d: Mapping[tuple[int, ...], Expr]) -> SuperFunction:
        items = sorted(((I, c) for I, c in d.items() if not c.is_zero()), key=_term_order)
        return cls(context, tuple(items))

    @classmethod
    def scalar(cls, context: Context, c) -> SuperFunction:
        if not isinstance(c, Expr):
            c = symcore.const(c)
        return cls(context, ((((), c),) if not c.is_zero() else ()))

    @classmethod
    def even_var(cls, context: Context, name: str) -> SuperFunction:
        if name not in context.even:
            raise UnknownVariableError(f"{name!r} is not an even coordinate of {context}")
        return cls(context, (((), symcore.var(name)),))

    @classmethod
    def odd_var(cls, context: Context, name: str) -> SuperFunction:
        if name not in context.odd:
            raise UnknownVariableError(f"{name!r} is not an odd coordinate of {context}")
        return cls(context, (((context.odd.index(name) + 1,), symcore.ONE),))

    @classmethod
    def coordinate(cls, context: Context, name: str) -> SuperFunction:
        if name in context.even:
            return cls.even_var(context, name)
        return cls.odd_var(context, name)

    def _check(self, other: SuperFunction) -> None:
        if self.context != other.context:
            raise ContextMismatchError(f"context mismatch: {self.context} vs {other.context}")

    def _coerce(self, other):
        if isinstance(other, SuperFunction):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction, Expr)):
            return SuperFunction.scalar(self.context, other)
        return NotImplemented

    def __add__(self, other) -> SuperFunction:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        d = dict(self.terms)
        for I, c in other.terms:
            d[I] = d[I] + c if I in d else c
        return SuperFunction.from_dict(self.context, d)

    __radd__ = __add__

    def __neg__(self) -> SuperFunction:
        return SuperFunction(self.context, tuple((I, -c) for I, c in self.terms))

    def __sub__(self, other) -> SuperFunction:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> SuperFunction:
        return (-self) + other

    def __mul__(self, other) -> SuperFunction:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        d: dict = {}
        for I, a in self.terms:
            for J, b in other.terms:
                sign, K = monomial_normalize(I + J)
                if sign == 0:
                    continue
                prod = a * b if sign > 0 else -(a * b)
                d[K] = d[K] + prod if K in d else prod
        return SuperFunction.from_dict(self.context, d)

    def __rmul__(self, other) -> SuperFunction:
        # scalars are even, so they commute
        return self.__mul__(other)

    def __pow__(self, n: int) -> SuperFunction:
        if n < 0:
            if len(self.terms) == 1 and self.terms[0][0] == ():
                return SuperFunction.scalar(self.context, self.terms[0][1] ** n)
            raise ValueError("negative powers are only defined for atom products without odd part")
        result = SuperFunction.scalar(self.context, 1)
        for _ in range(n):
            result = result * self
            if result.is_zero():
                break
        return result

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, I: tuple[int, ...]) -> Expr:
        for J, c in self.terms:
            if J == I:
                return c
        return symcore.ZERO

    def max_degree(self) -> int:
        return max((len(I) for I, _ in self.terms), default=0)

    def is_polynomial(self) -> bool:
        return all(c.is_polynomial() for _, c in self.terms)

    def __str__(self) -> str:
        return format_superfunction(self)

    def __repr__(self) -> str:
        return f"SuperFunction({format_superfunction(self)!r})"


def format_superfunction(f: SuperFunction) -> str:
    """Canonical distributed text, e.g. ``x1^2 + 2*x1*xi1*xi2``; re-parses to ``f``."""
    pieces: list[str] = []
    for I, coeff in f.terms:
        odd = "*".join(f.context.odd[i - 1] for i in I)
        for m, c in coeff.terms:
            text = symcore._term_text(m, c)
            if odd:
                if text == "1":
                    text = odd
                elif text == "-1":
                    text = "-" + odd
                else:
                    text = f"{text}*{odd}"
            pieces.append(text)
    if not pieces:
        return "0"
    out = [pieces[0]]
    for t in pieces[1:]:
        out.append(" - " + t[1:] if t.startswith("-") else " + " + t)
    return "".join(out)


def sf_add(f: SuperFunction, g: SuperFunction) -> SuperFunction:
    f._check(g)
    return f + g


def sf_mul(f: SuperFunction, g: SuperFunction) -> SuperFunction:
    f._check(g)
    return f * g


def parity(f: SuperFunction) -> Parity:
    degrees = {len(I) % 2 for I, _ in f.terms}
    if degrees <= {0}:
        return Parity.EVEN
    if degrees == {1}:
        return Parity.ODD
    return Parity.MIXED


def parity_bit(f: SuperFunction) -> int:
    p = parity(f)
    if p is Parity.MIXED:
        raise ParityError(f"{f} is not homogeneous")
    return 0 if p is Parity.EVEN else 1


def d_even(f: SuperFunction, name: str) -> SuperFunction:
    if name not in f.context.even:
        raise UnknownVariableError(f"{name!r} is not an even coordinate of {f.context}")
    return SuperFunction.from_dict(f.context, {I: symcore.diff_even(c, name) for I, c in f.terms})


def d_odd(f: SuperFunction, name: str) -> SuperFunction:
    """Left derivative: ``d/dxi_j (c xi^I) = (-1)^k c xi^(I without j)`` with
    ``k`` the position of ``j`` in ``I`` counted from 0."""
    if name not in f.context.odd:
        raise UnknownVariableError(f"{name!r} is not an odd coordinate of {f.context}")
    j = f.context.odd.index(name) + 1
    d: dict = {}
    for I, c in f.terms:
        if j not in I:
            continue
        k = I.index(j)
        rest = I[:k] + I[k + 1 :]
        d[rest] = c if k % 2 == 0 else -c
    return SuperFunction.from_dict(f.context, d)


def reduce(f: SuperFunction) -> Expr:
    """The degree-0 coefficient ``f_{emptyset}``."""
    return f.coefficient(())


def evaluate(f: SuperFunction, point: Mapping[str, Number]) -> dict[tuple[int, ...], Number]:
    """Evaluate every Grassmann coefficient of ``f`` at an even point."""
    return {I: symcore.eval_expr(c, point) for I, c in f.terms}


# transcendental functions of an even superfunction ----------------------


def _derivative_series(fname: str, a: Expr):
    """Yields the successive derivatives ``F^(k)(a)`` as expressions."""
    if fname == "exp":
        e = symcore.func_atom("exp", a)
        while True:
            yield e
    elif fname in ("sin", "cos"):
        s, c = symcore.func_atom("sin", a), symcore.func_atom("cos", a)
        cycle = [s, c, -s, -c] if fname == "sin" else [c, -s, -c, s]
        k = 0
        while True:
            yield cycle[k % 4]
            k += 1
    else:  # sqrt: d^k a^(1/2) = (1/2)(1/2 - 1)...(1/2 - k + 1) a^(1/2 - k)
        root = symcore.func_atom("sqrt", a)
        yield root
        if root.is_zero():
            raise EvaluationError("sqrt has no derivative at 0")
        coeff, k = Fraction(1, 2), 1
        while True:
            yield symcore.const(coeff) * root ** (1 - 2 * k)
            coeff *= Fraction(1, 2) - k
            k += 1


def apply_function(fname: str, u: SuperFunction) -> SuperFunction:
    """``F(a + nu) = sum_k F^(k)(a) nu^k / k!`` with ``a = reduce(u)``; the sum
    is finite because the nilpotent part ``nu`` satisfies ``nu^(n+1) = 0``."""
    if parity(u) is not Parity.EVEN:
        raise ParityError(f"{fname} needs an even argument, got {u}")
    a = reduce(u)
    nu = u - SuperFunction.scalar(u.context, a)
    result = SuperFunction.scalar(u.context, 0)
    power = SuperFunction.scalar(u.context, 1)
    series = _derivative_series(fname, a)
    k = 0
    while not power.is_zero():
        result = result + power * (next(series) * symcore.const(Fraction(1, math.factorial(k))))
        power = power * nu
        k += 1
    return result


# substitution ----------------------------------------------------------


class _Substitution:
    def __init__(self, target: Context, source: Context, even_images, odd_images):
        self.target = target
        self.source = source
        self.even = dict(zip(target.even, even_images))
        self.odd_images = list(odd_images)
        self.cache: dict = {}

    def expr(self, e: Expr) -> SuperFunction:
        result = SuperFunction.scalar(self.source, 0)
        for m, c in e.terms:
            term = SuperFunction.scalar(self.source, c)
            for g, k in m:
                term = term * self.gen_power(g, k)
                if term.is_zero():
                    break
            result = result + term
        return result

    def gen_power(self, g, k: int) -> SuperFunction:
        key = (g, k)
        if key not in self.cache:
            if isinstance(g, str):
                self.cache[key] = self.even[g] ** k
            else:
                base = apply_function(g.func, self.expr(g.arg))
                if k < 0:
                    # only sqrt^-1 style atoms carry negative exponents
                    inv = _invert_even(base)
                    self.cache[key] = inv ** (-k)
                else:
                    self.cache[key] = base**k
        return self.cache[key]

    def superfunction(self, f: SuperFunction) -> SuperFunction:
        result = SuperFunction.scalar(self.source, 0)
        for I, c in f.terms:
            term = self.expr(c)
            for i in I:
                if term.is_zero():
                    break
                term = term * self.odd_images[i - 1]
            result = result + term
        return result


def _invert_even(u: SuperFunction) -> SuperFunction:
    """Inverse of an even superfunction whose body is an atom product:
    ``(a + nu)^-1 = a^-1 sum_k (-nu a^-1)^k``."""
    a = reduce(u)
    a_inv = SuperFunction.scalar(u.context, a**-1)
    nu = u - SuperFunction.scalar(u.context, a)
    step = -(nu * a_inv)
    result = SuperFunction.scalar(u.context, 0)
    power = SuperFunction.scalar(u.context, 1)
    while not power.is_zero():
        result = result + power
        power = power * step
    return a_inv * result


def check_images(
    target: Context, even_images: Sequence[SuperFunction], odd_images: Sequence[SuperFunction]
) -> Context | None:
    """Validate arity, a common source context and strict parities."""
    if len(even_images) != len(target.even) or len(odd_images) != len(target.odd):
        raise ArityError(
            f"expected {len(target.even)}|{len(target.odd)} images, got {len(even_images)}|{len(odd_images)}"
        )
    images = list(even_images) + list(odd_images)
    source = images[0].context if images else None
    for name, img in zip(target.even + target.odd, images):
        if img.context != source:
            raise ContextMismatchError(f"image of {name} lives over {img.context}, expected {source}")
    for name, img in zip(target.even, even_images):
        if parity(img) is not Parity.EVEN:
            raise ParityError(f"image of even coordinate {name} is {parity(img).value}: {img}")
    for name, img in zip(target.odd, odd_images):
        if parity(img) is not Parity.ODD and not img.is_zero():
            raise ParityError(f"image of odd coordinate {name} is {parity(img).value}: {img}")
    return source


def substitute(
    f: SuperFunction,
    even_images: Sequence[SuperFunction],
    odd_images: Sequence[SuperFunction],
    source: Context | None = None,
) -> SuperFunction:
    """Pull ``f`` back along the coordinate images: every target even variable
    is replaced by its even image and every odd generator by its odd image."""
    src = check_images(f.context, even_images, odd_images) or source
    if src is None:
        raise ArityError("substituting into a 0|0 context needs an explicit source context")
    return _Substitution(f.context, src, even_images, odd_images).superfunction(f)


def substitute_many(
    fs: Iterable[SuperFunction],
    target: Context,
    even_images: Sequence[SuperFunction],
    odd_images: Sequence[SuperFunction],
    source: Context,
) -> list[SuperFunction]:
    """Substitute a batch sharing one image cache."""
    check_images(target, even_images, odd_images)
    sub = _Substitution(target, source, even_images, odd_images)
    out = []
    for f in fs:
        if f.context != target:
            raise ContextMismatchError(f"{f} does not live over {target}")
        out.append(sub.superfunction(f))
    return out


# parsing ---------------------------------------------------------------


class _SuperAlgebra:
    def __init__(self, context: Context):
        self.context = context

    def const(self, c: Fraction) -> SuperFunction:
        return SuperFunction.scalar(self.context, c)

    def var(self, name: str, pos: int) -> SuperFunction:
        if name in self.context.even or name in self.context.odd:
            return SuperFunction.coordinate(self.context, name)
        raise UnknownVariableError(f"unknown variable {name!r} at position {pos}")

    def power(self, base: SuperFunction, n: int, pos: int) -> SuperFunction:
        try:
            return base**n
        except ValueError as exc:
            raise ParseError(str(exc), pos) from None

    def call(self, fname: str, arg: SuperFunction, pos: int) -> SuperFunction:
        return apply_function(fname, arg)


def parse_superfunction(text: str, context: Context) -> SuperFunction:
    return parsing.interpret(parsing.parse_ast(text), _SuperAlgebra(context))


def from_ast(node: tuple, context: Context) -> SuperFunction:
    return parsing.interpret(node, _SuperAlgebra(context))
