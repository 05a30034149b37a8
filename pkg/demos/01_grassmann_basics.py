"""
Superfunctions on R^{1|3}
=========================

A superfunction is a finite sum of smooth coefficients times products of
anticommuting generators.  This walk-through shows the sign rules, parity,
the two kinds of derivative and what happens when a smooth function is
applied to something with a nilpotent part.
"""

from fractions import Fraction

from supertrans import grassmann
from supertrans.grassmann import Context

ctx = Context(("x",), ("t1", "t2", "t3"))


def S(text):
    return grassmann.parse_superfunction(text, ctx)


# %% Products of generators are stored sorted, with the sign absorbed
print("t2*t1        =", S("t2*t1"))
print("t1*t1        =", S("t1*t1"))
print("(t1+t2)(t1-t2) =", S("(t1 + t2)*(t1 - t2)"))

# %% Parity: odd, even, or mixed
for text in ("x*t1", "t1*t2", "x + t1"):
    print(f"{text:8s} -> {grassmann.parity(S(text)).value}")

# %% Odd derivatives act from the left, so moving past a generator costs a sign
f = S("x^2*t1*t2 + t3")
print("f            =", f)
print("d/dt1 f      =", grassmann.d_odd(f, "t1"))
print("d/dt2 f      =", grassmann.d_odd(f, "t2"))
print("d/dx f       =", grassmann.d_even(f, "x"))

# %% Smooth functions of an even element expand in a terminating Taylor series
g = S("sqrt(x + t1*t2)")
print("sqrt(x + t1*t2) at x=4 :", grassmann.evaluate(g, {"x": Fraction(4)}))
print("exp(t1*t2 + t1*t3)     =", S("exp(t1*t2 + t1*t3)"))

# %% The body (reduced function) forgets every generator
print("body of x^2 + 3*t1*t2 =", grassmann.reduce(S("x^2 + 3*t1*t2")))
