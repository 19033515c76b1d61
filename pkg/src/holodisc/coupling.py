"""Inter-element coupling matrices, self-adjointness and spectral gap checks.

The edge conditions for ``N`` elements read ``C+ u_R = C-^T u_L`` and
``C- f_R = C+^T f_L`` with flux ``f = -kappa u_x`` and circulant matrices
``C+-`` having diagonal ``1 - (gamma/2)(1 +- theta)`` and
``(gamma/2)(1 +- theta)`` on the cyclic subdiagonal.

Exact checks use sympy rationals.  The dichotomy check is floating point.
"""

from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
import sympy as sp

from .exactalg import as_rat

__all__ = [
    "CouplingMatrices", "CirculantSpectrum", "ElementEnsemble", "SelfAdjointnessReport",
    "DichotomyReport", "DegenerateConstraints", "NonPositiveDiffusivity",
    "build_coupling", "circulant_eigs_V", "is_exceptional", "random_ensemble",
    "self_adjointness_defect", "spectral_dichotomy",
]

_XI = sp.Symbol("xi")


class DegenerateConstraints(ValueError):
    """The edge-condition null space is too small to draw two independent fields."""


class NonPositiveDiffusivity(ValueError):
    """A per-element diffusivity is not strictly positive on [0, 1]."""


def _rat(x) -> sp.Rational:
    q = as_rat(x)
    return sp.Rational(q.numerator, q.denominator)


@dataclass(frozen=True)
class CouplingMatrices:
    N: int
    gamma: Fraction
    theta: Fraction
    C_plus: sp.Matrix
    C_minus: sp.Matrix

    def det_formula(self, sign: int) -> sp.Rational:
        """``[1 - (gamma/2)(1 +- theta)]^N - (-1)^N [(gamma/2)(1 +- theta)]^N``."""
        off = _rat(self.gamma) / 2 * (1 + sign * _rat(self.theta))
        return (1 - off) ** self.N - (-1) ** self.N * off ** self.N

    @property
    def det_plus(self) -> sp.Rational:
        return self.det_formula(+1)

    @property
    def det_minus(self) -> sp.Rational:
        return self.det_formula(-1)

    def commutes(self) -> bool:
        """Exact check of ``C+^T C- == C- C+^T``."""
        return self.C_plus.T * self.C_minus == self.C_minus * self.C_plus.T

    def is_circulant(self) -> bool:
        for M in (self.C_plus, self.C_minus):
            row = list(M.row(0))
            for i in range(1, self.N):
                if list(M.row(i)) != row[-i:] + row[:-i]:
                    return False
        return True


def _circulant(N: int, diag, off) -> sp.Matrix:
    M = sp.zeros(N, N)
    for i in range(N):
        M[i, i] = diag
        M[i, (i - 1) % N] += off
    return M


def build_coupling(N: int, gamma, theta) -> CouplingMatrices:
    """Exact circulant coupling matrices for ``N`` elements."""
    if N < 2:
        raise ValueError("need N >= 2 elements")
    g, t = _rat(gamma), _rat(theta)
    mats = []
    for sign in (+1, -1):
        off = g / 2 * (1 + sign * t)
        mats.append(_circulant(N, 1 - off, off))
    return CouplingMatrices(N, as_rat(gamma), as_rat(theta), mats[0], mats[1])


def is_exceptional(N: int, gamma, theta) -> bool:
    """Both coupling matrices singular (the zigzag case ``N`` even, ``gamma (1 +- theta) = 1``)."""
    cm = build_coupling(N, gamma, theta)
    return cm.det_plus == 0 and cm.det_minus == 0


@dataclass(frozen=True)
class CirculantSpectrum:
    eigenvalues: list[complex]
    zero_modes: list[int]


def circulant_eigs_V(N: int, theta: float, tol: float = 1e-12) -> CirculantSpectrum:
    """``lambda_k = (1 - theta)/2 + (1 + theta)/2 exp(-2 pi i k (N-1)/N)``."""
    if N < 2:
        raise ValueError("need N >= 2")
    eigs = [0.5 * (1 - theta) + 0.5 * (1 + theta) * cmath.exp(-2j * math.pi * k * (N - 1) / N)
            for k in range(N)]
    zeros = [k for k, lam in enumerate(eigs) if abs(lam) < tol]
    return CirculantSpectrum(eigs, zeros)


# ---------------------------------------------------------------------------
# self-adjointness on polynomial trial fields
# ---------------------------------------------------------------------------

@dataclass
class ElementEnsemble:
    """``N`` elements of width ``H``; per element diffusivity polynomial in ``xi``."""

    N: int
    degree: int
    kappas: list[sp.Poly]
    H: Fraction = Fraction(1)

    def __post_init__(self):
        if len(self.kappas) != self.N:
            raise ValueError("need one diffusivity per element")
        for j, kap in enumerate(self.kappas):
            if not _positive_on_unit(kap):
                raise NonPositiveDiffusivity(f"kappa_{j} is not positive on [0, 1]")


def _positive_on_unit(p: sp.Poly) -> bool:
    if p.eval(0) <= 0:
        return False
    if p.degree() <= 0:
        return True
    return p.count_roots(0, 1) == 0


def _kappa_poly(coeffs: Sequence) -> sp.Poly:
    """Polynomial in ``xi`` from ascending coefficients."""
    return sp.Poly(list(reversed([_rat(c) for c in coeffs])), _XI, domain="QQ")


def random_ensemble(rng: random.Random, N: int, degree: int, hetero: bool = True,
                    H=1) -> ElementEnsemble:
    """Seeded ensemble; heterogeneous diffusivities ``c0 + s (xi - r)^2`` are positive by construction."""
    kappas = []
    for _ in range(N):
        if hetero:
            c0 = Fraction(rng.randint(1, 9), rng.randint(1, 4))
            s = Fraction(rng.randint(0, 6), rng.randint(1, 3))
            r = Fraction(rng.randint(-2, 6), 4)
            kappas.append(_kappa_poly([c0 + s * r * r, -2 * s * r, s]))
        else:
            kappas.append(_kappa_poly([1]))
    return ElementEnsemble(N, degree, kappas, as_rat(H))


def _constraint_matrix(ens: ElementEnsemble, cm: CouplingMatrices) -> sp.Matrix:
    """Rows: ``C+ u_R - C-^T u_L = 0`` then ``C- f_R - C+^T f_L = 0``."""
    N, D = ens.N, ens.degree
    nvar = N * (D + 1)
    H = _rat(ens.H)
    uR = sp.zeros(N, nvar)
    uL = sp.zeros(N, nvar)
    fR = sp.zeros(N, nvar)
    fL = sp.zeros(N, nvar)
    for j, kap in enumerate(ens.kappas):
        k0, k1 = kap.eval(0), kap.eval(1)
        for p in range(D + 1):
            col = j * (D + 1) + p
            uR[j, col] = 1
            uL[j, col] = 1 if p == 0 else 0
            # f = -kappa u_xi / H; d/dxi xi^p = p xi^(p-1)
            fR[j, col] = -k1 * p / H
            fL[j, col] = -k0 * p / H if p == 1 else 0
    top = cm.C_plus * uR - cm.C_minus.T * uL
    bot = cm.C_minus * fR - cm.C_plus.T * fL
    return top.col_join(bot)


def _bilinear_defect(ens: ElementEnsemble, u: list[sp.Poly], v: list[sp.Poly]) -> sp.Rational:
    """``sum_j int (v (kappa u')' - u (kappa v')') dx`` exactly."""
    H = _rat(ens.H)
    total = sp.Rational(0)
    for kap, uj, vj in zip(ens.kappas, u, v):
        lu = (kap * uj.diff(_XI)).diff(_XI)
        lv = (kap * vj.diff(_XI)).diff(_XI)
        integrand = (vj * lu - uj * lv).integrate(_XI)
        total += (integrand.eval(1) - integrand.eval(0)) / H  # H dxi / H^2
    return total


@dataclass
class SelfAdjointnessReport:
    defect: sp.Rational
    exceptional: bool
    nullity: int
    trials: int
    defects: list[sp.Rational] = field(default_factory=list)

    @property
    def exact_zero(self) -> bool:
        return self.defect == 0


def self_adjointness_defect(ens: ElementEnsemble, gamma, theta, trials: int = 5,
                            seed: int = 0, fields: tuple | None = None) -> SelfAdjointnessReport:
    """Maximum ``|<v, L u> - <L v, u>|`` over random constrained polynomial pairs.

    ``fields`` may supply an explicit pair of coefficient vectors (length
    ``N*(degree+1)``, ascending powers per element) instead of random draws.
    """
    cm = build_coupling(ens.N, gamma, theta)
    A = _constraint_matrix(ens, cm)
    basis = A.nullspace()
    nullity = len(basis)
    exceptional = cm.det_plus == 0 and cm.det_minus == 0
    D = ens.degree

    def to_polys(vec) -> list[sp.Poly]:
        return [sp.Poly(list(reversed(list(vec[j * (D + 1):(j + 1) * (D + 1)]))), _XI, domain="QQ")
                for j in range(ens.N)]

    pairs = []
    if fields is not None:
        pairs.append(tuple(sp.Matrix([_rat(x) for x in f]) for f in fields))
        for f in pairs[0]:
            if A * f != sp.zeros(A.rows, 1):
                raise ValueError("supplied field violates the edge conditions")
    else:
        if nullity < 2:
            raise DegenerateConstraints(f"constraint null space has dimension {nullity} < 2")
        rng = random.Random(seed)
        for _ in range(trials):
            pair = []
            for _ in range(2):
                vec = sp.zeros(A.cols, 1)
                for b in basis:
                    vec += b * rng.randint(-9, 9)
                pair.append(vec)
            pairs.append(tuple(pair))
    defects = [abs(_bilinear_defect(ens, to_polys(u), to_polys(v))) for u, v in pairs]
    return SelfAdjointnessReport(max(defects), exceptional, nullity, len(pairs), defects)


# ---------------------------------------------------------------------------
# spectral dichotomy at gamma = 0
# ---------------------------------------------------------------------------

@dataclass
class DichotomyReport:
    eigenvalues: np.ndarray
    n_zero: int
    gap: float
    beta: float
    norm: float
    tol: float
    eps_disc: float

    @property
    def dichotomy_holds(self) -> bool:
        return self.gap <= -self.beta * (1 - self.eps_disc)


def spectral_dichotomy(N: int, H: float, kappa: Callable[[np.ndarray], np.ndarray] | None,
                       M: int, tol: float = 1e-8, eps_disc: float | None = None) -> DichotomyReport:
    """Eigenvalues of ``(kappa u_x)_x`` on ``N`` isolated periodic elements (``gamma = 0``).

    Second-order conservative differences with ``M`` nodes per element,
    diffusivity sampled at half nodes and periodic wrap inside each element.
    """
    if kappa is None:
        def kappa(x):
            return np.ones_like(x)
    h = H / M
    n = N * M
    L = np.zeros((n, n))
    local = np.arange(M)
    for j in range(N):
        x_half = j * H + (local + 0.5) * h     # kappa between node i and i+1
        kh = np.asarray(kappa(x_half), dtype=float)
        if np.any(kh <= 0):
            raise NonPositiveDiffusivity("kappa must be positive")
        base = j * M
        for i in range(M):
            ip = base + (i + 1) % M
            im = base + (i - 1) % M
            kp, km = kh[i], kh[(i - 1) % M]
            row = base + i
            L[row, ip] += kp / h ** 2
            L[row, im] += km / h ** 2
            L[row, row] -= (kp + km) / h ** 2
    eig = np.sort(np.linalg.eigvalsh(L))[::-1]
    norm = float(np.max(np.abs(eig)))
    zero = np.abs(eig) < tol * norm
    n_zero = int(np.count_nonzero(zero))
    rest = eig[~zero]
    gap = float(rest[0]) if rest.size else float("-inf")
    xs = np.linspace(0, N * H, 64 * N * M, endpoint=False)
    beta = 4 * math.pi ** 2 * float(np.min(kappa(xs))) / H ** 2
    eps = 10 / M ** 2 if eps_disc is None else eps_disc
    return DichotomyReport(eig, n_zero, gap, beta, norm, tol, eps)
