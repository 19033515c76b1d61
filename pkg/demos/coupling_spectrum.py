"""
What the edge coupling does to the element spectrum
===================================================

Each element ``j`` talks to its neighbours through two circulant matrices
``C+`` and ``C-``.  They are invertible except for one case: an even number
of elements with ``gamma = 1`` and ``theta = 0``, where an alternating
zigzag mode slips through.  With the coupling switched off the diffusion
operator has exactly one zero eigenvalue per element and everything else
decays at least as fast as ``-4 pi^2/H^2``.

    python3 demos/coupling_spectrum.py
"""

import math
import random
from fractions import Fraction

from holodisc.coupling import (
    build_coupling, circulant_eigs_V, random_ensemble, self_adjointness_defect,
    spectral_dichotomy,
)

print("determinants of C+ for gamma = 1:")
for N in range(2, 8):
    for theta in (Fraction(0), Fraction(1, 3)):
        cm = build_coupling(N, 1, theta)
        print(f"  N={N} theta={str(theta):>3}: det C+ = {cm.det_plus}")

spectrum = circulant_eigs_V(4, 0.0)
print("\nN=4, theta=0 eigenvalues:", [round(complex(v).real, 12) for v in spectrum.eigenvalues],
      "zero modes at", spectrum.zero_modes)

rng = random.Random(1)
ens = random_ensemble(rng, 5, 4)
rep = self_adjointness_defect(ens, Fraction(7, 10), Fraction(3, 10))
print(f"\nrandom quartic fields on 5 elements: defect {rep.defect} (exact rational)")
rep = self_adjointness_defect(random_ensemble(rng, 4, 4), 1, 0)
print(f"zigzag case N=4, gamma=1, theta=0: defect {rep.defect}, flagged {rep.exceptional}")

print("\n N  zero eigenvalues  gap        -4 pi^2")
for N in range(4, 9):
    d = spectral_dichotomy(N, 1.0, None, 64)
    print(f"{N:>2}  {d.n_zero:>16}  {d.gap:9.4f}  {-4 * math.pi ** 2:9.4f}")
