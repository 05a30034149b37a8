"""
Jacobians, tangent maps and classification
==========================================

A morphism between superdomains is given by the images of the target
coordinates.  Its Jacobian has four blocks; at a point only the two
diagonal blocks survive, and their ranks decide whether the morphism is an
immersion, a submersion, both or neither.
"""

from fractions import Fraction

from supertrans import symcore
from supertrans.calculus import (
    classify,
    immersion_local_model,
    jacobian,
    submersion_local_model,
    tangent_matrix,
)
from supertrans.geometry import SuperDomain, compose, make_morphism


def mat(m):
    return [[symcore.format_number(v) for v in row] for row in m]


X = SuperDomain("X", ("x",), ("xi",))
T = SuperDomain("T", ("t",), ("e",))

# %% The fold t = x^2, e = xi
fold = make_morphism(X, T, ["x^2"], ["xi"], "fold")
for name, block in jacobian(fold).blocks().items():
    print(name, [[str(e) for e in row] for row in block])

for x in (Fraction(0), Fraction(1)):
    tm = tangent_matrix(fold, {"x": x})
    print(f"x = {x}: even block {mat(tm.even_block)}, odd block {mat(tm.odd_block)} -> {classify(fold, {'x': x}).value}")

# %% The even-by-odd block carries a sign
twist = make_morphism(X, T, ["x"], ["x*xi"])
print("Jacobian of (x, x*xi):", {k: [[str(e) for e in r] for r in b] for k, b in jacobian(twist).blocks().items()})

# %% Composites: the tangent map of fold o twist is the product of the factors
comp = compose(fold, make_morphism(X, X, ["x + 1"], ["x*xi"]))
print("fold o shift =", comp.describe(), "at x=0:", mat(tangent_matrix(comp, {"x": Fraction(0)}).even_block))

# %% The local models are the standard immersion and submersion
imm = immersion_local_model(1, 1, 1, 1)
sub = submersion_local_model(1, 1, 1, 1)
print("immersion model :", imm.describe(), "->", classify(imm, {"x1": Fraction(2)}).value)
print("submersion model:", sub.describe(), "->", classify(sub, {"x1": Fraction(2), "y1": Fraction(0)}).value)
