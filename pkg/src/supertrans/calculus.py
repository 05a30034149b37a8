"""Super Jacobians, pointwise tangent matrices, ranks and the
immersion/submersion classification."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np

from . import grassmann, symcore
from .errors import OutOfBoxError
from .geometry import (
    EvenPoint,
    SuperDomain,
    SuperMorphism,
    make_morphism,
    reduced_map_eval,
)
from .grassmann import SuperFunction
from .symcore import Number

RANK_RTOL = 1e-9

Matrix = tuple  # tuple[tuple[Number, ...], ...], row-major


@dataclass(frozen=True)
class SuperJacobian:
    """Blocks ``A = df/dx``, ``B = -df/dxi``, ``C = dg/dx``, ``D = dg/dxi``;
    rows index target coordinates, columns source coordinates."""

    A: tuple
    B: tuple
    C: tuple
    D: tuple

    def blocks(self) -> dict[str, tuple]:
        return {"A": self.A, "B": self.B, "C": self.C, "D": self.D}


@dataclass(frozen=True)
class TangentMatrix:
    even_block: Matrix
    odd_block: Matrix
    basepoint: tuple  # sorted (name, value) pairs

    @property
    def point(self) -> dict[str, Number]:
        return dict(self.basepoint)


class Classification(enum.Enum):
    IMMERSION = "Immersion"
    SUBMERSION = "Submersion"
    BOTH = "Both"
    NEITHER = "Neither"

    @property
    def is_immersion(self) -> bool:
        return self in (Classification.IMMERSION, Classification.BOTH)

    @property
    def is_submersion(self) -> bool:
        return self in (Classification.SUBMERSION, Classification.BOTH)


def jacobian(psi: SuperMorphism) -> SuperJacobian:
    src = psi.source
    f, g = psi.even_images, psi.odd_images
    A = tuple(tuple(grassmann.d_even(fa, x) for x in src.even) for fa in f)
    B = tuple(tuple(-grassmann.d_odd(fa, xi) for xi in src.odd) for fa in f)
    C = tuple(tuple(grassmann.d_even(gb, x) for x in src.even) for gb in g)
    D = tuple(tuple(grassmann.d_odd(gb, xi) for xi in src.odd) for gb in g)
    return SuperJacobian(A, B, C, D)


def _eval_block(block, p: EvenPoint) -> Matrix:
    return tuple(tuple(symcore.eval_expr(grassmann.reduce(e), p) for e in row) for row in block)


def tangent_matrix(psi: SuperMorphism, p: EvenPoint, jac: SuperJacobian | None = None) -> TangentMatrix:
    """Matrix of ``d psi_x`` in coordinate bases: the reduced ``A`` and ``D``
    blocks evaluated at ``p`` (the off-diagonal blocks are odd and reduce to 0)."""
    if not psi.source.contains(p):
        raise OutOfBoxError(f"point {symcore.format_point(p)} lies outside the box of {psi.source.name}")
    jac = jac or jacobian(psi)
    pt = {v: p[v] for v in psi.source.even}
    basepoint = tuple((v, pt[v]) for v in psi.source.even)
    return TangentMatrix(_eval_block(jac.A, pt), _eval_block(jac.D, pt), basepoint)


def _is_exact(m: Matrix) -> bool:
    return all(isinstance(x, Fraction) for row in m for x in row)


def exact_rank(m: Matrix) -> int:
    """Rank by fraction-free (Bareiss) elimination on an integer-scaled copy."""
    rows = []
    for row in m:
        den = lcm(*(x.denominator for x in row)) if row else 1
        rows.append([int(x * den) for x in row])
    if not rows or not rows[0]:
        return 0
    n_rows, n_cols = len(rows), len(rows[0])
    rank, prev = 0, 1
    for col in range(n_cols):
        pivot = next((r for r in range(rank, n_rows) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for r in range(rank + 1, n_rows):
            for c in range(col + 1, n_cols):
                rows[r][c] = (rows[rank][col] * rows[r][c] - rows[r][col] * rows[rank][c]) // prev
            rows[r][col] = 0
        prev = rows[rank][col]
        rank += 1
        if rank == n_rows:
            break
    return rank


def numeric_rank(m: Matrix, rtol: float = RANK_RTOL) -> int:
    if not m or not m[0]:
        return 0
    s = np.linalg.svd(np.array(m, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def matrix_rank(m: Matrix) -> int:
    return exact_rank(m) if _is_exact(m) else numeric_rank(m)


def rank_pair(tm: TangentMatrix) -> tuple[int, int]:
    return matrix_rank(tm.even_block), matrix_rank(tm.odd_block)


def classify_ranks(ranks: tuple[int, int], source: SuperDomain, target: SuperDomain) -> Classification:
    imm = ranks == (len(source.even), len(source.odd))
    sub = ranks == (len(target.even), len(target.odd))
    if imm and sub:
        return Classification.BOTH
    if imm:
        return Classification.IMMERSION
    if sub:
        return Classification.SUBMERSION
    return Classification.NEITHER


def classify(psi: SuperMorphism, p: EvenPoint, jac: SuperJacobian | None = None) -> Classification:
    """Immersion iff ``d psi_x`` is injective, submersion iff surjective,
    decided blockwise on the even and odd ranks."""
    return classify_ranks(rank_pair(tangent_matrix(psi, p, jac)), psi.source, psi.target)


def matmul(a: Matrix, b: Matrix, cols: int | None = None) -> Matrix:
    """``a . b``; ``cols`` is needed when ``b`` has no rows."""
    inner = len(b)
    if cols is None:
        cols = len(b[0]) if b else 0
    return tuple(
        tuple(sum((a[i][k] * b[k][j] for k in range(inner)), Fraction(0)) for j in range(cols))
        for i in range(len(a))
    )


def chain_rule_blocks(psi: SuperMorphism, phi: SuperMorphism, p: EvenPoint) -> tuple[Matrix, Matrix]:
    """Products of the factors' blocks: ``T(psi, phi~(p)) . T(phi, p)``."""
    outer = tangent_matrix(psi, reduced_map_eval(phi, p))
    inner = tangent_matrix(phi, p)
    src = phi.source
    return (
        matmul(outer.even_block, inner.even_block, len(src.even)),
        matmul(outer.odd_block, inner.odd_block, len(src.odd)),
    )


# local models ------------------------------------------------------------


def immersion_local_model(m: int, n: int, r: int, s: int) -> SuperMorphism:
    """``U^{m|n} -> V^{m+r|n+s}``: ``x -> x, y -> 0, xi -> xi, theta -> 0``."""
    U = SuperDomain.standard("U", m, n)
    V = SuperDomain(
        "V",
        tuple(f"x{i}" for i in range(1, m + 1)) + tuple(f"y{a}" for a in range(1, r + 1)),
        tuple(f"xi{j}" for j in range(1, n + 1)) + tuple(f"theta{b}" for b in range(1, s + 1)),
    )
    ctx = U.context
    zero = SuperFunction.scalar(ctx, 0)
    even = [U.coordinate(x) for x in U.even] + [zero] * r
    odd = [U.coordinate(xi) for xi in U.odd] + [zero] * s
    return make_morphism(U, V, even, odd, "immersion_model")


def submersion_local_model(m: int, n: int, r: int, s: int) -> SuperMorphism:
    """``V^{m+r|n+s} -> U^{m|n}``: ``x -> x, xi -> xi`` (the ``y, theta`` are forgotten)."""
    U = SuperDomain.standard("U", m, n)
    V = SuperDomain(
        "V",
        tuple(f"x{i}" for i in range(1, m + 1)) + tuple(f"y{a}" for a in range(1, r + 1)),
        tuple(f"xi{j}" for j in range(1, n + 1)) + tuple(f"theta{b}" for b in range(1, s + 1)),
    )
    even = [V.coordinate(x) for x in U.even]
    odd = [V.coordinate(xi) for xi in U.odd]
    return make_morphism(V, U, even, odd, "submersion_model")
