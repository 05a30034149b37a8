import itertools
import random
from fractions import Fraction

import pytest
from helpers import rand_morphism, rand_point
from hypothesis import given, settings
from hypothesis import strategies as st

from supertrans import grassmann
from supertrans.calculus import (
    Classification,
    chain_rule_blocks,
    classify,
    exact_rank,
    immersion_local_model,
    jacobian,
    numeric_rank,
    rank_pair,
    submersion_local_model,
    tangent_matrix,
)
from supertrans.geometry import SuperDomain, compose, identity, make_morphism

X11 = SuperDomain("X", ("x",), ("xi",))
T11 = SuperDomain("T", ("t",), ("e",))
F = Fraction


def blocks_as_text(jac):
    return {k: [[str(e) for e in row] for row in b] for k, b in jac.blocks().items()}


def test_jacobian_blocks_by_hand():
    psi = make_morphism(X11, T11, ["x"], ["x*xi"])
    assert blocks_as_text(jacobian(psi)) == {"A": [["1"]], "B": [["0"]], "C": [["xi"]], "D": [["x"]]}


def test_odd_block_uses_negated_left_derivatives():
    X = SuperDomain("X", ("x",), ("xi1", "xi2"))
    psi = make_morphism(X, SuperDomain("T", ("t",), ()), ["x + xi1*xi2"], [])
    assert blocks_as_text(jacobian(psi))["B"] == [["-xi2", "xi1"]]


def test_identity_jacobian():
    X = SuperDomain.standard("X", 2, 2)
    jac = blocks_as_text(jacobian(identity(X)))
    assert jac["A"] == jac["D"] == [["1", "0"], ["0", "1"]]
    assert jac["B"] == jac["C"] == [["0", "0"], ["0", "0"]]


def test_block_parities():
    rng = random.Random(5)
    X, Y = SuperDomain.standard("X", 2, 2), SuperDomain.standard("Y", 2, 2, "y", "th")
    jac = jacobian(rand_morphism(rng, X, Y, 2, 3))
    for block, want in ((jac.A, 0), (jac.D, 0), (jac.B, 1), (jac.C, 1)):
        for e in itertools.chain(*block):
            assert e.is_zero() or grassmann.parity_bit(e) == want


def test_tangent_matrix_examples():
    tm = tangent_matrix(make_morphism(X11, T11, ["x"], ["x*xi"]), {"x": F(2)})
    assert (tm.even_block, tm.odd_block) == (((1,),), ((2,),))
    tm = tangent_matrix(make_morphism(X11, T11, ["x^2"], ["xi"]), {"x": F(0)})
    assert (tm.even_block, tm.odd_block) == (((0,),), ((1,),))
    assert rank_pair(tm) == (0, 1)


def test_ranks():
    assert exact_rank(((F(1), F(0)), (F(2), F(0)))) == 1
    assert exact_rank(((F(1),),)) == 1
    assert exact_rank(((F(1), F(2), F(3)), (F(2), F(4), F(6)), (F(0), F(0), F(1)))) == 2
    assert numeric_rank(((1.0, 0.0), (0.0, 1e-12))) == 1
    assert numeric_rank(((1.0, 2.0), (3.0, 4.0))) == 2


def test_classify_examples():
    assert classify(make_morphism(X11, T11, ["x^2"], ["xi"]), {"x": F(0)}) is Classification.NEITHER
    assert classify(immersion_local_model(1, 1, 1, 1), {"x1": F(3)}) is Classification.IMMERSION
    assert classify(submersion_local_model(1, 1, 1, 1), {"x1": F(3), "y1": F(-1)}) is Classification.SUBMERSION
    assert classify(identity(X11), {"x": F(7)}) is Classification.BOTH


@pytest.mark.parametrize("m,n,r,s", [(0, 0, 1, 0), (2, 1, 0, 2), (3, 3, 3, 3), (1, 0, 0, 0)])
def test_local_models_have_the_stated_shape(m, n, r, s):
    imm = immersion_local_model(m, n, r, s)
    assert (imm.source.dim.even, imm.source.dim.odd, imm.target.dim.even, imm.target.dim.odd) == (m, n, m + r, n + s)
    sub = submersion_local_model(m, n, r, s)
    assert (sub.source.dim.even, sub.target.dim.even) == (m + r, m)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_chain_rule_at_points(seed):
    rng = random.Random(seed)
    dims = [(rng.randint(0, 3), rng.randint(0, 3)) for _ in range(3)]
    A, B, C = (SuperDomain.standard(f"D{k}", m, n, f"a{k}_", f"s{k}_") for k, (m, n) in enumerate(dims))
    phi, psi = rand_morphism(rng, A, B), rand_morphism(rng, B, C)
    p = rand_point(rng, A.even)
    tm = tangent_matrix(compose(psi, phi), p)
    assert (tm.even_block, tm.odd_block) == chain_rule_blocks(psi, phi, p)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_rank_invariant_under_affine_changes(seed):
    rng = random.Random(seed)
    X, Y = SuperDomain.standard("X", 2, 2), SuperDomain.standard("Y", 2, 2, "y", "th")
    psi = rand_morphism(rng, X, Y)
    # unipotent affine change of Y: (y1 + c*y2 + 1, y2; th1, th2 + d*th1)
    c, d = F(rng.randint(-3, 3)), F(rng.randint(-3, 3))
    y1, y2, t1, t2 = (Y.coordinate(v) for v in ("y1", "y2", "th1", "th2"))
    g = make_morphism(Y, Y, [y1 + c * y2 + 1, y2], [t1, t2 + d * t1])
    p = rand_point(rng, X.even)
    assert rank_pair(tangent_matrix(compose(g, psi), p)) == rank_pair(tangent_matrix(psi, p))
