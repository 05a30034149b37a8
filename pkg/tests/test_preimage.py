from dataclasses import replace
from fractions import Fraction

import pytest
from helpers import (
    CIRCLE_SAMPLES,
    circle_instance,
    coordinate_chart,
    e3_instance,
    identity_instance,
    square_instance,
)

from supertrans.calculus import classify
from supertrans.charts import Submanifold
from supertrans.errors import (
    DomainMismatchError,
    NoChartError,
    NonTransversalError,
    NotOnFiberError,
)
from supertrans.geometry import SuperDomain, make_morphism, reduced_map_eval
from supertrans.preimage import (
    codim_check,
    construct_preimage_affine,
    defining_submersion,
    overlap_consistency,
    solved_set_on_grid,
    verify_submersion_on_fiber,
)
from supertrans.transversality import Grid, scan_preimage

F = Fraction


def test_defining_submersion_examples():
    psi, W = e3_instance()
    ds = defining_submersion(psi, W.charts[0])
    assert ds.Psi.describe() == {"t1": "x1^2 + x2", "e1": "x1*xi1 + xi2"}
    psi, W = identity_instance(2, 2, 1, 1)
    assert defining_submersion(psi, W.charts[0]).Psi.describe() == {"t1": "x2", "e1": "xi2"}
    psi, W = square_instance()
    assert list(defining_submersion(psi, W.charts[0]).Psi.images) == list(psi.images)


def test_defining_submersion_dimension_mismatch():
    psi, _ = e3_instance()
    _, W = square_instance()
    with pytest.raises(DomainMismatchError):
        defining_submersion(psi, W.charts[0])


def test_preimage_box_is_conservative():
    psi, W = circle_instance()
    ds = defining_submersion(psi, W.charts[0])
    (lo1, hi1), (lo2, hi2) = ds.v_box
    assert lo1 <= F(-99, 100) and hi1 >= F(99, 100) and lo2 <= F(1, 20) and hi2 >= F(3, 2)
    assert hi2 <= 2


def test_verify_submersion_on_fiber():
    psi, W = e3_instance()
    ev = verify_submersion_on_fiber(defining_submersion(psi, W.charts[0]), [{"x1": F(1), "x2": F(-1)}])
    assert ev.passed and ev.records[0][1] == (1, 1)
    psi, W = square_instance()
    ds = defining_submersion(psi, W.charts[0])
    ev = verify_submersion_on_fiber(ds, [{"x": F(0)}])
    assert not ev.passed and ev.witness == (("x", 0),)
    assert verify_submersion_on_fiber(ds, []).passed
    with pytest.raises(NotOnFiberError):
        verify_submersion_on_fiber(ds, [{"x": F(1, 2)}])


def test_identity_preimage():
    psi, W = identity_instance(2, 2, 1, 1)
    res = construct_preimage_affine(psi, W)
    (pc,) = res.charts
    assert pc.equations() == ["x2 = 0", "xi2 = 0"]
    assert pc.j.describe() == {"x1": "x1", "x2": "0", "xi1": "xi1", "xi2": "0"}
    assert pc.psi_hat.describe() == {"u1": "x1", "v1": "xi1"}
    assert pc.diagram_commutes and pc.level_set_exact
    assert codim_check(res, W) and res.codim == (1, 1)


def test_affine_shift_preimage():
    X = SuperDomain.standard("X", 2, 2)
    Y = SuperDomain.standard("Y", 2, 2, "y", "th")
    psi = make_morphism(X, Y, ["x1", "x1 + x2 + 1"], ["xi1", "xi2"])
    res = construct_preimage_affine(psi, Submanifold(Y, (coordinate_chart(Y, 1, 1),)))
    assert res.charts[0].equations() == ["x2 = -x1 - 1", "xi2 = 0"]


def test_e3_preimage():
    psi, W = e3_instance()
    res = construct_preimage_affine(psi, W, grid=Grid.uniform(-2, 2, F(1, 2), 2))
    (pc,) = res.charts
    assert pc.equations() == ["x2 = -x1^2", "xi2 = -x1*xi1"]
    assert pc.diagram_commutes and codim_check(res, W)
    assert all(ev.passed for ev in res.submersion_evidence)
    assert res.submersions[0].fiber_points == tuple(r.point for r in res.transversality.records)
    # j is an immersion at sampled points of Z and psi_hat lands on W
    for x1 in (F(-1), F(0), F(5, 4)):
        assert classify(pc.j, {"x1": x1}).is_immersion
        y = reduced_map_eval(psi, reduced_map_eval(pc.j, {"x1": x1}))
        assert W.charts[0].on_w(y)


def test_codim_check_negative_control():
    psi, W = e3_instance()
    res = construct_preimage_affine(psi, W)
    fat = SuperDomain("Zbad", ("x1", "x2"), ("xi1",))
    bad = replace(res, charts=(replace(res.charts[0], domain=fat),))
    assert not codim_check(bad, W)


def test_solved_set_matches_scan():
    psi, W = e3_instance()
    grid = Grid.uniform(-2, 2, F(1, 2), 2)
    res = construct_preimage_affine(psi, W)
    assert solved_set_on_grid(res, grid) == scan_preimage(psi, W, grid)


def test_non_transversal_rejected():
    psi, W = square_instance()
    with pytest.raises(NonTransversalError):
        construct_preimage_affine(psi, W, grid=Grid.uniform(-1, 1, F(1, 4), 1))


def test_non_affine_falls_back():
    X = SuperDomain.standard("X", 2, 1)
    Y = SuperDomain.standard("Y", 2, 1, "y", "th")
    psi = make_morphism(X, Y, ["x1", "sin(x2) + x1*x2^2"], ["exp(x1)*xi1"])
    res = construct_preimage_affine(psi, Submanifold(Y, (coordinate_chart(Y, 1, 1),)))
    assert not res.affine and res.charts is None
    assert "even" in res.fallback_reason
    assert res.submersions[0].Psi.describe() == {"t1": "x1*x2^2 + sin(x2)"}


def test_odd_cubic_falls_back():
    X = SuperDomain.standard("X", 1, 3)
    Y = SuperDomain.standard("Y", 1, 1, "y", "th")
    psi = make_morphism(X, Y, ["x1"], ["xi1 + xi1*xi2*xi3"])
    res = construct_preimage_affine(psi, Submanifold(Y, (coordinate_chart(Y, 1, 0),)))
    assert not res.affine and "odd" in res.fallback_reason


def test_circle_gluing():
    psi, W = circle_instance()
    res = construct_preimage_affine(psi, W)
    assert [pc.equations() for pc in res.charts] == [["x2 = sqrt(-x1^2 + 1)"], ["x1 = sqrt(-x2^2 + 1)"]]
    samples = [{"x1": a, "x2": b} for a, b in CIRCLE_SAMPLES]
    ev = overlap_consistency(res, samples)
    assert ev.passed and len(ev.records) == 8


def test_circle_gluing_detects_corruption():
    psi, W = circle_instance(corrupt=True)
    res = construct_preimage_affine(psi, W)
    ev = overlap_consistency(res, [{"x1": a, "x2": b} for a, b in CIRCLE_SAMPLES])
    assert not ev.passed and ev.witness == (0, 1, (("x1", F(3, 5)), ("x2", F(4, 5))))


def test_identical_charts_glue_trivially():
    psi, _ = identity_instance(2, 0, 1, 0)
    Y = psi.target
    W = Submanifold(Y, (coordinate_chart(Y, 1, 0), coordinate_chart(Y, 1, 0, "C2")))
    res = construct_preimage_affine(psi, W)
    ev = overlap_consistency(res, [{"x1": F(k, 3), "x2": F(0)} for k in range(-3, 4)])
    assert ev.passed


def test_overlap_requires_overlap():
    psi, W = circle_instance()
    res = construct_preimage_affine(psi, W)
    with pytest.raises(NoChartError):
        overlap_consistency(res, [{"x1": F(-3, 5), "x2": F(4, 5)}])
