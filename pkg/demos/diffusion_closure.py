"""
Learning a macroscale diffusion scheme
======================================

Cut the line into elements, let each element relax on its own, then switch
on the coupling between neighbours one power of ``gamma`` at a time.  The
macroscale rule for the element amplitudes ``U_j`` falls out as a stencil
whose coefficients are exact rationals in ``gamma`` and ``theta``.

At full coupling (``gamma = 1``) the equivalent PDE of that stencil should
be plain ``u_t = u_xx``; the truncation order only decides how many
derivatives are matched.

    python3 demos/diffusion_closure.py
"""

from holodisc.constructor import Diffusion, construct
from holodisc.equivpde import consistency_report, to_equivalent_pde

family = Diffusion()

print("closure at O(gamma^3), taps in units of U_{j+s}:")
low = construct(family, {"gamma": 3})
for shift, coeff in sorted(low.evolution.folded().taps.items()):
    print(f"  s={str(shift):>3}: {coeff}")

# raising the order widens the stencil by two taps per power of gamma
print("\norder  iterations  width  defect order at gamma=1")
for p in range(2, 8):
    r = construct(family, {"gamma": p})
    rep = consistency_report(to_equivalent_pde(r.evolution, p + 1), family)
    print(f"{p:>5}  {r.iterations:>10}  {str(r.evolution.width()):>5}  {rep.defect_order}")

# coupling strength: how the d^4 error depends on gamma and theta
eq = to_equivalent_pde(construct(family, {"gamma": 6}).evolution, 6)
print("\nequivalent PDE coefficients at O(gamma^6):")
for n in range(2, 7):
    print(f"  d^{n}: {eq.coeff(n)}")
print("\nat gamma = 1 the d^4 error cancels and d^6 is the first survivor:")
print("  ", {n: str(c) for n, c in eq.subs(gamma=1).terms.items()})
