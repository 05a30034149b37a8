"""Instance builders and seeded random generators shared by the test modules."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from supertrans import grassmann, symcore
from supertrans.charts import AdaptedChart, Submanifold
from supertrans.geometry import SuperDomain, SuperMorphism, make_morphism
from supertrans.grassmann import Context, SuperFunction


def rand_fraction(rng: random.Random, num: int = 5, den: int = 3) -> Fraction:
    return Fraction(rng.randint(-num, num), rng.randint(1, den))


def rand_expr(rng: random.Random, names, max_deg: int = 3, n_terms: int = 3) -> symcore.Expr:
    out = symcore.ZERO
    for _ in range(n_terms):
        term = symcore.const(rand_fraction(rng))
        for _ in range(rng.randint(0, max_deg)):
            if names:
                term = term * symcore.var(rng.choice(names))
        out = out + term
    return out


def rand_sf(
    rng: random.Random, ctx: Context, max_deg: int = 3, parity: int | None = None, n_terms: int = 3
) -> SuperFunction:
    """Random superfunction; ``parity`` 0/1 makes it homogeneous."""
    n = len(ctx.odd)
    subsets = [I for k in range(n + 1) for I in itertools.combinations(range(1, n + 1), k)]
    if parity is not None:
        subsets = [I for I in subsets if len(I) % 2 == parity]
    d = {}
    for _ in range(n_terms):
        if not subsets:
            break
        I = rng.choice(subsets)
        d[I] = d.get(I, symcore.ZERO) + rand_expr(rng, ctx.even, max_deg, 2)
    return SuperFunction.from_dict(ctx, d)


def rand_point(rng: random.Random, names, num: int = 7, den: int = 4) -> dict[str, Fraction]:
    return {v: rand_fraction(rng, num, den) for v in names}


def rand_morphism(rng: random.Random, src: SuperDomain, tgt: SuperDomain, max_deg: int = 2, n_terms: int = 2):
    ctx = src.context
    even = [rand_sf(rng, ctx, max_deg, 0, n_terms) for _ in tgt.even]
    odd = [rand_sf(rng, ctx, max_deg, 1, n_terms) for _ in tgt.odd]
    return make_morphism(src, tgt, even, odd)


def std(name: str, m: int, n: int, even_prefix: str | None = None, odd_prefix: str | None = None, box=None):
    ep = even_prefix or f"{name.lower()}x"
    op = odd_prefix or f"{name.lower()}e"
    return SuperDomain.standard(name, m, n, ep, op, box)


# adapted charts ---------------------------------------------------------------


def shear_chart(
    rng: random.Random, Y: SuperDomain, keep_even: int, keep_odd: int, shift: dict | None = None, name: str = "C"
) -> AdaptedChart:
    """A triangular polynomial chart with a polynomial inverse.

    Even: ``u_k = y_k + a_k * y_{k-1}^2 - c_k``; odd: ``v_j = th_j + b_j * y_1 * th_{j-1}``.
    ``shift`` maps even coordinate indices to the constant ``c_k``.
    """
    shift = shift or {}
    m, n = len(Y.even), len(Y.odd)
    C = SuperDomain(name, tuple(f"u{k}" for k in range(1, m + 1)), tuple(f"v{j}" for j in range(1, n + 1)))
    a = [Fraction(rng.randint(-2, 2)) for _ in range(m)]
    b = [Fraction(rng.randint(-2, 2)) for _ in range(n)]
    c = [Fraction(shift.get(k, 0)) for k in range(m)]
    yc, tc = Y.context, C.context
    y = [SuperFunction.coordinate(yc, v) for v in Y.even]
    th = [SuperFunction.coordinate(yc, v) for v in Y.odd]
    u = [SuperFunction.coordinate(tc, v) for v in C.even]
    w = [SuperFunction.coordinate(tc, v) for v in C.odd]
    fwd_e = [y[k] + (a[k] * y[k - 1] ** 2 if k else 0) - c[k] for k in range(m)]
    fwd_o = [th[j] + (b[j] * y[0] * th[j - 1] if j and m else 0) for j in range(n)]
    # invert triangularly: y_k = u_k + c_k - a_k * y_{k-1}^2
    inv_e: list[SuperFunction] = []
    for k in range(m):
        val = u[k] + c[k]
        if k:
            val = val - a[k] * inv_e[k - 1] ** 2
        inv_e.append(val)
    inv_o: list[SuperFunction] = []
    for j in range(n):
        val = w[j]
        if j and m:
            val = val - b[j] * inv_e[0] * inv_o[j - 1]
        inv_o.append(val)
    phi = make_morphism(Y, C, fwd_e, fwd_o)
    inv = make_morphism(C, Y, inv_e, inv_o)
    return AdaptedChart(phi, keep_even, keep_odd, inv)


def coordinate_chart(Y: SuperDomain, keep_even: int, keep_odd: int, name: str = "C", box=None) -> AdaptedChart:
    C = SuperDomain(name, tuple(f"u{k}" for k in range(1, len(Y.even) + 1)), tuple(f"v{j}" for j in range(1, len(Y.odd) + 1)))
    phi = make_morphism(Y, C, [Y.coordinate(v) for v in Y.even], [Y.coordinate(v) for v in Y.odd])
    inv = make_morphism(C, Y, [C.coordinate(v) for v in C.even], [C.coordinate(v) for v in C.odd])
    return AdaptedChart(phi, keep_even, keep_odd, inv, box)


# named instances ----------------------------------------------------------------


def e3_instance(box=((-2, 2), (-2, 2))):
    X = SuperDomain("X", ("x1", "x2"), ("xi1", "xi2"), box)
    Y = SuperDomain("Y", ("y1", "y2"), ("th1", "th2"))
    psi = make_morphism(X, Y, ["x1", "x2 + x1^2"], ["xi1", "x1*xi1 + xi2"], "psi")
    W = Submanifold(Y, (coordinate_chart(Y, 1, 1),), "W")
    return psi, W


def square_instance(box=((-1, 1),)):
    """``t -> x^2, e -> xi`` against the origin of ``R^{1|1}``."""
    X = SuperDomain("X", ("x",), ("xi",), box)
    R = SuperDomain("R1", ("t",), ("e",))
    psi = make_morphism(X, R, ["x^2"], ["xi"], "psi")
    return psi, Submanifold(R, (coordinate_chart(R, 0, 0),), "O")


def identity_instance(m: int = 2, n: int = 2, keep_even: int = 1, keep_odd: int = 1):
    X = SuperDomain.standard("X", m, n)
    Y = SuperDomain.standard("Y", m, n, "y", "th")
    psi = make_morphism(X, Y, [X.coordinate(v) for v in X.even], [X.coordinate(v) for v in X.odd], "id")
    return psi, Submanifold(Y, (coordinate_chart(Y, keep_even, keep_odd),), "W")


CIRCLE_SAMPLES = [
    (Fraction(a, c), Fraction(b, c))
    for a, b, c in [(3, 4, 5), (4, 3, 5), (5, 12, 13), (12, 5, 13), (8, 15, 17), (15, 8, 17), (7, 24, 25), (24, 7, 25)]
]


def circle_instance(corrupt: bool = False):
    """Identity into the plane against the unit circle covered by two graph arcs."""
    Y = SuperDomain("Y", ("y1", "y2"), ())
    X = SuperDomain("X", ("x1", "x2"), (), ((-2, 2), (-2, 2)))
    psi = make_morphism(X, Y, ["x1", "x2"], [], "psi")
    A = SuperDomain("A", ("u", "s"), ())
    B = SuperDomain("B", ("u", "s"), ())
    upper = AdaptedChart(
        make_morphism(Y, A, ["y1", "y2 - sqrt(1 - y1^2)"], []),
        1,
        0,
        make_morphism(A, Y, ["u", "s + sqrt(1 - u^2)"], []),
        ((Fraction(-99, 100), Fraction(99, 100)), (Fraction(1, 20), Fraction(3, 2))),
    )
    sign = "+" if corrupt else "-"
    back = "-" if corrupt else "+"
    right = AdaptedChart(
        make_morphism(Y, B, ["y2", f"y1 {sign} sqrt(1 - y2^2)"], []),
        1,
        0,
        make_morphism(B, Y, [f"s {back} sqrt(1 - u^2)", "u"], []),
        ((Fraction(1, 20), Fraction(3, 2)), (Fraction(-99, 100), Fraction(99, 100))),
    )
    return psi, Submanifold(Y, (upper, right), "S")


def compose_images(outer: SuperMorphism, inner: SuperMorphism) -> list[SuperFunction]:
    """Composite images by direct per-image substitution (no shared cache)."""
    return [grassmann.substitute(f, inner.even_images, inner.odd_images, inner.source.context) for f in outer.images]
