"""
Preimages of a submanifold
==========================

When psi is transversal to W, the preimage Z is a submanifold of X with the
same codimension as W.  In each chart the defining submersion Psi = Pr o phi o psi
cuts Z out as a level set.  If Psi is affine in a block of coordinates the
level set can be solved exactly, giving an embedding j : Z -> X and a
restricted map psi_hat : Z -> W.
"""

from fractions import Fraction

from supertrans.charts import w_inclusion
from supertrans.geometry import compose
from supertrans.preimage import (
    codim_check,
    construct_preimage_affine,
    overlap_consistency,
)
from supertrans.scene import parse_scene
from supertrans.transversality import Grid

SCENE = """
superdomain X dim 2|2 coords x1, x2 ; xi1, xi2 box x1 in [-2, 2], x2 in [-2, 2]
superdomain Y dim 2|2 coords y1, y2 ; th1, th2
morphism psi : X -> Y { y1 = x1 ; y2 = x2 + x1^2 ; th1 = xi1 ; th2 = x1*xi1 + xi2 }
submanifold W in Y {
  chart {
    map { u1 = y1 ; u2 = y2 ; v1 = th1 ; v2 = th2 }
    inverse { y1 = u1 ; y2 = u2 ; th1 = v1 ; th2 = v2 }
    keep_even = 1 ; keep_odd = 1
  }
}
"""

scene = parse_scene(SCENE)
psi, W = scene.morphisms["psi"], scene.submanifolds["W"]

# %% Solve the level set
res = construct_preimage_affine(psi, W, grid=Grid.uniform(-2, 2, Fraction(1, 2), 2))
(pc,) = res.charts
print("defining submersion:", res.submersions[0].Psi.describe())
print("solved equations   :", pc.equations())
print("j                  :", pc.j.describe())
print("psi_hat            :", pc.psi_hat.describe())
print("codim Z in X       : {}|{}  (matches W: {})".format(*res.codim, codim_check(res, W)))

# %% The square psi o j = i o psi_hat commutes on the nose
print("diagram commutes   :", compose(psi, pc.j) == compose(w_inclusion(W.charts[0]), pc.psi_hat))

# %% Two charts of the unit circle glue on their overlap
CIRCLE = """
superdomain X dim 2|0 coords x1, x2 ; box x1 in [-2, 2], x2 in [-2, 2]
superdomain Y dim 2|0 coords y1, y2 ;
morphism psi : X -> Y { y1 = x1 ; y2 = x2 }
submanifold S in Y {
  chart {
    map { u = y1 ; s = y2 - sqrt(1 - y1^2) }
    inverse { y1 = u ; y2 = s + sqrt(1 - u^2) }
    keep_even = 1 ; keep_odd = 0
    box y1 in [-99/100, 99/100], y2 in [1/20, 3/2]
  }
  chart {
    map { u = y2 ; s = y1 - sqrt(1 - y2^2) }
    inverse { y1 = s + sqrt(1 - u^2) ; y2 = u }
    keep_even = 1 ; keep_odd = 0
    box y1 in [1/20, 3/2], y2 in [-99/100, 99/100]
  }
}
"""
circle = parse_scene(CIRCLE)
res = construct_preimage_affine(circle.morphisms["psi"], circle.submanifolds["S"])
for chart in res.charts:
    print(f"chart {chart.chart_index}:", chart.equations())
samples = [{"x1": Fraction(a, c), "x2": Fraction(b, c)} for a, b, c in [(3, 4, 5), (5, 12, 13), (8, 15, 17)]]
ev = overlap_consistency(res, samples)
print("overlap consistent:", ev.passed, "on", len(ev.records), "samples")
