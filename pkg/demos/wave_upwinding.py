"""
Tuning the upwind bias of a learnt advection scheme
===================================================

For ``u_t + c u_x = 0`` the edge-coupling parameter ``theta`` trades a
centred stencil for a one-sided one.  Here we build the lowest-order
closure, evaluate it at full coupling for several ``theta`` and look at
the equivalent PDE: the leading error is numerical diffusion that grows
with ``theta``.

    python3 demos/wave_upwinding.py
"""

from fractions import Fraction

from holodisc.constructor import Wave1, construct
from holodisc.equivpde import to_equivalent_pde

closure = construct(Wave1(), {"gamma": 2}).evolution
folded = closure.folded()

print("lowest-order advection closure:")
for shift, coeff in sorted(folded.taps.items()):
    print(f"  s={str(shift):>3}: {coeff}")

print("\ntheta   stencil at gamma=1 (units of c/H)      leading error")
eq = to_equivalent_pde(closure, 4)
for theta in (Fraction(-1), Fraction(0), Fraction(1, 2), Fraction(1)):
    taps = folded.subs(gamma=1, theta=theta, c=1, H=1)
    row = {int(s): str(c) for s, c in sorted(taps.taps.items())}
    err = eq.coeff(2).subs(gamma=1, theta=theta)
    print(f"{str(theta):>5}   {str(row):<36}  d^2: {err}")

# with more orders the d^2 term keeps a factor gamma(1 - gamma) and vanishes at full coupling
eq4 = to_equivalent_pde(construct(Wave1(), {"gamma": 4}).evolution, 4)
print("\nd^2 coefficient at O(gamma^4):", eq4.coeff(2))
