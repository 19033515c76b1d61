"""
Homogenising a rapidly varying diffusivity
==========================================

The diffusivity ``kappa(x) = 1/(1 + a cos kx)`` oscillates on a scale far
below the element size.  Building the closure with ``a`` as a second series
variable gives a coarse stencil whose leading behaviour is the harmonic
mean of ``kappa``, plus corrections in ``a^2/k^2``.

We compare three decay rates for Fourier modes ``exp(iKx)``: the Bloch
eigenvalue of a fully resolved fine grid, the symbol of the learnt coarse
stencil and the truncated equivalent PDE.

    python3 demos/heterogeneous_homogenisation.py
"""

import math

from holodisc import simkit
from holodisc.constructor import HeterogeneousDiffusion, construct
from holodisc.equivpde import to_equivalent_pde

a, k, H = 0.5, 16 * math.pi, 0.25   # four heterogeneity periods per element

ev = construct(HeterogeneousDiffusion(), {"gamma": 7, "a": 3}).evolution
eq = to_equivalent_pde(ev, 6).subs(gamma=1)
print("equivalent PDE at full coupling:")
for n in (2, 4, 6):
    print(f"  d^{n}: {eq.coeff(n)}")

taps = simkit.numeric_taps(ev.folded(), {"gamma": 1, "a": a, "k": k, "H": H})
print(f"\ncoarse stencil spans {min(taps)}..{max(taps)}")

print("\n K   fine Bloch      coarse stencil  predicted       rel. err (coarse)")
for K in (1, 2, 3, 4):
    fine = simkit.bloch_rate(a, k, K)
    coarse = simkit.dispersion_measure("holistic", K, a=a, k=k, H=H, taps=taps)
    pred = simkit.predicted_het_rate(a, k, K)
    print(f"{K:>2}  {fine:>14.8f}  {coarse:>14.8f}  {pred:>14.8f}  {abs(coarse - pred) / abs(pred):.2e}")

# the arithmetic mean of kappa is 1/sqrt(1 - a^2), noticeably too fast
print("\narithmetic mean of kappa would give rate", round(-1 / math.sqrt(1 - a * a), 6),
      "for K = 1; the Bloch rate is", round(simkit.bloch_rate(a, k, 1), 6))
