"""
Transversality to a submanifold
===============================

W sits inside Y as the zero set of the last coordinates of an adapted chart.
A morphism psi is transversal to W when, at every x with psi(x) in W, the
image of the tangent map together with the tangent space of W fills the
tangent space of Y.  The library checks this twice: by a span rank, and by
asking whether the chart projection composed with psi is a submersion.
"""

from fractions import Fraction

from supertrans import symcore
from supertrans.scene import parse_scene
from supertrans.transversality import Grid, check_transversal

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

superdomain T dim 1|0 coords t ; box t in [-1, 1]
superdomain P dim 2|0 coords a, b ;
morphism along : T -> P { a = t ; b = 0 }
morphism across : T -> P { a = 0 ; b = t }
submanifold Axis in P {
  chart { map { u = a ; w = b } inverse { a = u ; b = w } keep_even = 1 ; keep_odd = 0 }
}
"""

scene = parse_scene(SCENE)


def show(label, report):
    print(f"{label}: transversal={report.transversal} on {report.fiber_size} fiber points ({report.mode})")
    for r in report.records:
        print(f"   {symcore.format_point(dict(r.point))}  span ranks {r.ranks_even}|{r.ranks_odd}  projection agrees: {r.agreement}")


# %% A shear of R^{2|2}: the fiber over W is the parabola x2 = -x1^2
psi, W = scene.morphisms["psi"], scene.submanifolds["W"]
show("shear vs W", check_transversal(psi, W, grid=Grid.uniform(-2, 2, Fraction(1, 2), 2)))

# %% Two curves against the horizontal axis of the plane
axis = scene.submanifolds["Axis"]
grid = Grid.uniform(-1, 1, Fraction(1, 2), 1)
show("t -> (t, 0)", check_transversal(scene.morphisms["along"], axis, grid=grid))
show("t -> (0, t)", check_transversal(scene.morphisms["across"], axis, grid=grid))
