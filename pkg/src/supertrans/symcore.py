"""Exact symbolic kernel for smooth coefficient functions of even variables.

An :class:`Expr` is a polynomial with rational coefficients in two kinds of
generators: even variables (plain names) and opaque transcendental atoms ``sin(E)``, ``cos(E)``, ``exp(E)``, ``sqrt(E)`` whose
argument ``E`` is itself a normalized :class:`Expr`.  Atoms may carry
negative exponents (needed for ``d sqrt(u) = u'/(2 sqrt(u))``); variables
may not.

Normal form: fully expanded, terms sorted in graded-lexicographic order with
variables before atoms and variable names compared in natural order
(``x2 < x10``).  Structural equality of normal forms is equality of values
for polynomial expressions.
"""

from __future__ import annotations

import math
import random
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction
from functools import cache, cached_property
from typing import Union

from . import parsing
from .errors import (
    EvaluationError,
    MissingBindingError,
    ParseError,
    UnknownVariableError,
)

Number = Union[Fraction, float]
Gen = Union[str, "Atom"]
Monomial = tuple  # tuple[tuple[Gen, int], ...], sorted by generator key

NUMERIC_TOL = 1e-9


@dataclass(frozen=True)
class Atom:
    func: str
    arg: Expr

    def __str__(self) -> str:
        return f"{self.func}({self.arg})"


def _natural_key(name: str) -> tuple:
    parts = re.split(r"(\d+)", name)
    return tuple(int(p) if i % 2 else p for i, p in enumerate(parts))


@cache
def gen_key(g: Gen) -> tuple:
    if isinstance(g, str):
        return (0, _natural_key(g))
    return (1, g.func, str(g.arg))


def _mono_key(m: Monomial) -> tuple:
    deg = sum(e for _, e in m)
    return (-deg, tuple((gen_key(g), -e) for g, e in m))


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for g, e in b:
        exps[g] = exps.get(g, 0) + e
    return tuple(sorted(((g, e) for g, e in exps.items() if e != 0), key=lambda ge: gen_key(ge[0])))


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"expected an exact rational, got {c!r}")


@dataclass(frozen=True)
class Expr:
    """Normalized smooth expression; build with :func:`const`, :func:`var`,
    :func:`func_atom` or :func:`parse_expr` rather than directly."""

    terms: tuple  # tuple[tuple[Monomial, Fraction], ...] in normal order

    @classmethod
    def from_dict(cls, d: Mapping[Monomial, Fraction]) -> Expr:
        items = [(m, c) for m, c in d.items() if c != 0]
        items.sort(key=lambda mc: _mono_key(mc[0]))
        return cls(tuple(items))

    # arithmetic ------------------------------------------------------
    def _coerce(self, other) -> Expr:
        if isinstance(other, Expr):
            return other
        if isinstance(other, (int, Fraction)):
            return const(other)
        return NotImplemented

    def __add__(self, other) -> Expr:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not other.terms:
            return self
        if not self.terms:
            return other
        d = dict(self.terms)
        for m, c in other.terms:
            d[m] = d.get(m, 0) + c
        return Expr.from_dict(d)

    __radd__ = __add__

    def __neg__(self) -> Expr:
        return Expr(tuple((m, -c) for m, c in self.terms))

    def __sub__(self, other) -> Expr:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> Expr:
        return (-self) + other

    def __mul__(self, other) -> Expr:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not self.terms or not other.terms:
            return ZERO
        d: dict = {}
        for m1, c1 in self.terms:
            for m2, c2 in other.terms:
                m = _mono_mul(m1, m2)
                d[m] = d.get(m, 0) + c1 * c2
        return Expr.from_dict(d)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> Expr:
        if n < 0:
            if len(self.terms) != 1 or any(isinstance(g, str) for g, _ in self.terms[0][0]):
                raise ValueError("negative powers are only defined for products of atoms")
            m, c = self.terms[0]
            return Expr((((tuple((g, e * n) for g, e in m)), c**n),))
        result, base = ONE, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # inspection ------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not m for m, _ in self.terms)

    def constant_value(self) -> Fraction:
        """Value of a constant expression (0 for the zero expression)."""
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self.terms[0][1] if self.terms else Fraction(0)

    def constant_term(self) -> Fraction:
        for m, c in self.terms:
            if not m:
                return c
        return Fraction(0)

    def is_polynomial(self) -> bool:
        return not self.atoms()

    def atoms(self) -> frozenset:
        return frozenset(g for m, _ in self.terms for g, _ in m if isinstance(g, Atom))

    @cached_property
    def variables(self) -> frozenset:
        out: set[str] = set()
        for m, _ in self.terms:
            for g, _ in m:
                if isinstance(g, str):
                    out.add(g)
                else:
                    out |= g.arg.variables
        return frozenset(out)

    def degree_in(self, v: str) -> int:
        """Highest exponent of ``v`` outside atoms; -1 if ``v`` occurs inside an atom."""
        deg = 0
        for m, _ in self.terms:
            for g, e in m:
                if g == v:
                    deg = max(deg, e)
                elif isinstance(g, Atom) and v in g.arg.variables:
                    return -1
        return deg

    def coefficient_of(self, v: str, power: int) -> Expr:
        """Coefficient of ``v**power`` when the expression is viewed as a polynomial in ``v``."""
        d: dict = {}
        for m, c in self.terms:
            e = dict(m).get(v, 0)
            if e == power:
                rest = tuple((g, k) for g, k in m if g != v)
                d[rest] = d.get(rest, 0) + c
        return Expr.from_dict(d)

    # printing --------------------------------------------------------
    @cached_property
    def _text(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for idx, (m, c) in enumerate(self.terms):
            t = _term_text(m, c)
            if idx == 0:
                out.append(t)
            elif t.startswith("-"):
                out.append(" - " + t[1:])
            else:
                out.append(" + " + t)
        return "".join(out)

    def __str__(self) -> str:
        return self._text

    def __repr__(self) -> str:
        return f"Expr({self._text!r})"


def _gen_text(g: Gen, e: int) -> str:
    base = g if isinstance(g, str) else str(g)
    return base if e == 1 else f"{base}^{e}"


def _term_text(m: Monomial, c: Fraction) -> str:
    if not m:
        return str(c)
    body = "*".join(_gen_text(g, e) for g, e in m)
    if c == 1:
        return body
    if c == -1:
        return "-" + body
    return f"{c}*{body}"


ZERO = Expr(())
ONE = Expr((((), Fraction(1)),))


def const(c) -> Expr:
    c = _as_fraction(c)
    return Expr((((), c),)) if c else ZERO


def var(name: str) -> Expr:
    return Expr(((((name, 1),), Fraction(1)),))


def func_atom(func: str, arg: Expr) -> Expr:
    if func not in parsing.FUNCTIONS:
        raise ValueError(f"unknown function {func!r}")
    exact = _exact_value(func, arg)
    if exact is not None:
        return const(exact)
    return Expr((((((Atom(func, arg), 1),)), Fraction(1)),))


def _exact_value(func: str, arg: Expr) -> Fraction | None:
    """Rational values at rational arguments: F(0) and square roots of squares."""
    if not arg.is_constant():
        return None
    a = arg.constant_value()
    if a == 0:
        return {"sin": Fraction(0), "cos": Fraction(1), "exp": Fraction(1), "sqrt": Fraction(0)}[func]
    if func == "sqrt" and a > 0:
        n, d = math.isqrt(a.numerator), math.isqrt(a.denominator)
        if n * n == a.numerator and d * d == a.denominator:
            return Fraction(n, d)
    return None


# parsing ---------------------------------------------------------------


class _ExprAlgebra:
    def __init__(self, variables: Iterable[str]):
        self.variables = set(variables)

    def const(self, c: Fraction) -> Expr:
        return const(c)

    def var(self, name: str, pos: int) -> Expr:
        if name not in self.variables:
            raise UnknownVariableError(f"unknown variable {name!r} at position {pos}")
        return var(name)

    def power(self, base: Expr, n: int, pos: int) -> Expr:
        try:
            return base**n
        except ValueError as exc:
            raise ParseError(str(exc), pos) from None

    def call(self, fname: str, arg: Expr, pos: int) -> Expr:
        return func_atom(fname, arg)


def parse_expr(text: str, variables: Iterable[str]) -> Expr:
    """Parse ``text`` into a normalized expression over ``variables``."""
    return parsing.interpret(parsing.parse_ast(text), _ExprAlgebra(variables))


def from_ast(node: tuple, variables: Iterable[str]) -> Expr:
    return parsing.interpret(node, _ExprAlgebra(variables))


# differentiation -------------------------------------------------------


def _atom_derivative(a: Atom, v: str) -> Expr:
    darg = diff_even(a.arg, v)
    if darg.is_zero():
        return ZERO
    if a.func == "sin":
        outer = func_atom("cos", a.arg)
    elif a.func == "cos":
        outer = -func_atom("sin", a.arg)
    elif a.func == "exp":
        outer = func_atom("exp", a.arg)
    else:  # sqrt
        outer = const(Fraction(1, 2)) * func_atom("sqrt", a.arg) ** -1
    return outer * darg


def diff_even(f: Expr, v: str, variables: Iterable[str] | None = None) -> Expr:
    """Partial derivative of ``f`` with respect to the even variable ``v``."""
    if variables is not None and v not in set(variables):
        raise UnknownVariableError(f"unknown variable {v!r}")
    if v not in f.variables:
        return ZERO
    acc: dict = {}
    result = ZERO
    for m, c in f.terms:
        for k, (g, e) in enumerate(m):
            if isinstance(g, str):
                if g != v:
                    continue
                rest = m[:k] + (((g, e - 1),) if e > 1 else ()) + m[k + 1 :]
                acc[rest] = acc.get(rest, 0) + c * e
            else:
                dg = _atom_derivative(g, v)
                if dg.is_zero():
                    continue
                rest = m[:k] + (((g, e - 1),) if e != 1 else ()) + m[k + 1 :]
                result = result + Expr((((rest), c * e),)) * dg
    return Expr.from_dict(acc) + result


# evaluation ------------------------------------------------------------

_FLOAT_FUNCS = {"sin": math.sin, "cos": math.cos, "exp": math.exp, "sqrt": math.sqrt}


def _eval_atom(a: Atom, point: Mapping[str, Number]) -> float:
    x = float(_eval(a.arg, point))
    try:
        return _FLOAT_FUNCS[a.func](x)
    except (ValueError, OverflowError) as exc:
        raise EvaluationError(f"{a} undefined at {a.arg}={x!r}") from exc


def _eval(f: Expr, point: Mapping[str, Number]) -> Number:
    total: Number = Fraction(0)
    for m, c in f.terms:
        val: Number = c
        for g, e in m:
            base = point[g] if isinstance(g, str) else _eval_atom(g, point)
            try:
                val = val * base**e
            except ZeroDivisionError as exc:
                raise EvaluationError(f"division by zero evaluating {f}") from exc
        total = total + val
    return total


def eval_expr(f: Expr, point: Mapping[str, Number]) -> Number:
    """Evaluate ``f`` at ``point``.

    Exact ``Fraction`` when ``f`` is polynomial and every binding is rational;
    a binary64 ``float`` as soon as an atom or a float binding is involved.
    """
    missing = f.variables - point.keys()
    if missing:
        raise MissingBindingError(f"no value for {', '.join(sorted(missing, key=_natural_key))}")
    pt = {k: (Fraction(v) if isinstance(v, int) else v) for k, v in point.items()}
    val = _eval(f, pt)
    if f.atoms() or any(isinstance(pt[v], float) for v in f.variables):
        return float(val)
    return val


def probably_zero(f: Expr, tol: float = NUMERIC_TOL, samples: int = 16, seed: int = 0) -> bool:
    """Zero test: exact for polynomials; for transcendental expressions a
    randomized screen at ``samples`` rational points (a nonzero value
    certifies nonzero)."""
    if f.is_zero():
        return True
    if f.is_polynomial():
        return False
    rng = random.Random(seed)
    names = sorted(f.variables, key=_natural_key)
    tried = 0
    for _ in range(samples * 4):
        pt = {v: Fraction(rng.randint(-400, 400), 997) for v in names}
        try:
            val = eval_expr(f, pt)
        except EvaluationError:
            continue
        tried += 1
        if abs(val) > tol:
            return False
        if tried >= samples:
            break
    return tried > 0


def is_close(a: Number, b: Number, tol: float = NUMERIC_TOL) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return abs(float(a) - float(b)) <= tol


def is_zero_value(a: Number, tol: float = NUMERIC_TOL) -> bool:
    if isinstance(a, Fraction):
        return a == 0
    return abs(a) <= tol


# interval evaluation (conservative enclosures) ---------------------------

Interval = tuple  # (lo, hi) floats


def _imul(a: Interval, b: Interval) -> Interval:
    ps = [x * y for x in a for y in b]
    if any(math.isnan(p) for p in ps):
        return (-math.inf, math.inf)
    return (min(ps), max(ps))


def _ipow(a: Interval, e: int) -> Interval:
    lo, hi = a
    if e == 0:
        return (1.0, 1.0)
    if e < 0:
        if lo <= 0 <= hi:
            return (-math.inf, math.inf)
        return _ipow((1 / hi, 1 / lo), -e)
    if e % 2 == 1:
        return (lo**e, hi**e)
    if lo >= 0:
        return (lo**e, hi**e)
    if hi <= 0:
        return (hi**e, lo**e)
    return (0.0, max(lo**e, hi**e))


def _iatom(a: Atom, box: Mapping[str, Interval]) -> Interval:
    lo, hi = eval_interval(a.arg, box)
    if a.func in ("sin", "cos"):
        return (-1.0, 1.0)
    if a.func == "exp":
        return (math.exp(min(lo, 700)), math.exp(min(hi, 700)))
    return (math.sqrt(max(lo, 0.0)), math.sqrt(hi) if hi >= 0 else 0.0)


def eval_interval(f: Expr, box: Mapping[str, Interval]) -> Interval:
    """Conservative enclosure of ``f`` over ``box`` (naive interval arithmetic)."""
    lo = hi = 0.0
    for m, c in f.terms:
        iv: Interval = (float(c), float(c))
        for g, e in m:
            base = box[g] if isinstance(g, str) else _iatom(g, box)
            iv = _imul(iv, _ipow(tuple(map(float, base)), e))
        lo, hi = lo + iv[0], hi + iv[1]
    return (lo, hi)


def natural_sorted(names: Iterable[str]) -> list[str]:
    return sorted(names, key=_natural_key)


def format_point(p) -> str:
    """``(x1=1, x2=-1/2)`` for messages."""
    items = p.items() if isinstance(p, Mapping) else p
    return "(" + ", ".join(f"{k}={format_number(v)}" for k, v in items) + ")"


def format_number(x: Number) -> str | float:
    """Serialization used in reports: rationals as ``"num/den"`` text."""
    if isinstance(x, Fraction):
        return str(x)
    return float(x)
