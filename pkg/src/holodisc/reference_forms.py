"""Published closed-form results, typed in by hand from their mu/delta form.

Everything here is built only from :func:`expand_mu_delta` and symbol
arithmetic, never from the constructor, so it serves as an independent
golden reference.  Series variables (``gamma``, ``a``) appear as ordinary
symbols: compare against ``MacroEvolution.folded()`` or
``SubgridField.folded()``.
"""

from __future__ import annotations

from fractions import Fraction as F

from .exactalg import ONE, ParamPoly, sym
from .gridops import CONST, Stencil, SubgridPoly, cos_h, expand_mu_delta, sin_h

__all__ = [
    "diffusion_field_gamma3", "diffusion_closure_gamma3", "diffusion_closure_gamma6",
    "diffusion_equivalent_gamma9", "wave_closure_gamma2", "wave_closure_gamma5",
    "wave_field_gamma2", "wave_equivalent_gamma6", "het_field_gamma3",
    "het_closure_extra", "het_equivalent_full_coupling", "md",
]

g = sym("gamma")
th = sym("theta")
H = sym("H")
c = sym("c")
a = sym("a")
k = sym("k")


def md(mu: int, delta: int, coeff=ONE) -> Stencil:
    """``coeff * mu**mu * delta**delta`` as taps."""
    return expand_mu_delta({(mu, delta): coeff})


def _poly(*coeffs) -> ParamPoly:
    """``sum coeffs[i] * gamma**i`` from rationals."""
    out = ParamPoly()
    for i, q in enumerate(coeffs):
        if q:
            out = out + g ** i * F(q)
    return out


def _xi(*coeffs, harmonic=CONST) -> dict:
    return {p: F(q) for p, q in enumerate(coeffs) if q}


def _field(terms) -> SubgridPoly:
    """Sum of ``xi polynomial * harmonic * stencil`` triples."""
    out = SubgridPoly()
    for xi_coeffs, harmonic, st in terms:
        for p, q in enumerate(xi_coeffs):
            if q:
                out = out + SubgridPoly({(p, harmonic): st * F(q)})
    return out


# -- diffusion --------------------------------------------------------------

def diffusion_field_gamma3() -> SubgridPoly:
    """Subgrid field of ``u_t = u_xx`` to errors ``O(gamma^3)``, symbolic theta."""
    t2 = th * th
    half = F(1, 2)
    lin = (-half, 1)                      # xi - 1/2
    quad = (F(1, 6), -1, 1)               # xi^2 - xi + 1/6
    return _field([
        ((1,), CONST, md(0, 0)),
        (lin, CONST, md(1, 1, g)),
        (quad, CONST, md(0, 2, g * g * half)),
        (lin, CONST, md(1, 3, g * g * (ONE + t2) * F(-1, 4))),
        (quad, CONST, md(0, 4, g * g * (ONE - t2) * F(1, 8))),
        (lin, CONST, md(0, 2, th * (g - g * g) * (-half))),
        (lin, CONST, md(0, 4, th * g * g * F(1, 4))),
    ])


def diffusion_closure_gamma3() -> Stencil:
    """``dU/dt`` to ``O(gamma^3)``: ``gamma^2/H^2 [(1 - theta^2) mu^2 + theta^2] delta^2``."""
    t2 = th * th
    return (md(2, 2, ONE - t2) + md(0, 2, t2)) * (g * g * sym("H", -2))


def diffusion_closure_gamma6() -> Stencil:
    """``dU/dt`` to ``O(gamma^6)``, symbolic theta."""
    t2 = th * th
    s = t2 * (md(0, 2, g ** 2) + md(0, 4, g ** 3 * F(-1, 2))
              + (md(0, 4, F(5, 3)) + md(0, 6)) * (g ** 4 * F(1, 4))
              - (md(0, 6, F(5, 3)) + md(0, 8, F(1, 2))) * (g ** 5 * F(1, 4)))
    mixed = md(0, 0, F(2, 3)) + md(2, 0, F(1, 3))
    s = s + t2 * (ONE - t2) * (mixed * md(0, 6, g ** 4 * F(1, 16))
                                - mixed * md(0, 8, g ** 5 * F(1, 16)))
    s = s + (ONE - t2) * (md(2, 2, g ** 2) + md(2, 4, g ** 3 * F(-1, 2))
                          + (md(0, 0) + md(0, 2, F(11, 8))) * md(2, 4, g ** 4 * F(1, 6))
                          - (md(0, 0) + md(0, 2, F(5, 8))) * md(2, 6, g ** 5 * F(1, 6)))
    return s * sym("H", -2)


def diffusion_equivalent_gamma9() -> dict[int, ParamPoly]:
    """Equivalent-PDE coefficients (derivative order -> coefficient) at ``O(gamma^9)``.

    The ``(1 - theta^2) H^6 d^8`` bracket carries ``gamma^2`` on its first and
    ``gamma^8`` on its last entry; computation confirms both powers.
    """
    t2 = th * th
    A, B = ONE - t2, t2
    C, D = t2 * (ONE - t2), t2 * t2 * (ONE - t2)
    return {
        2: g * g,
        4: (A * _poly(0, 0, F(1, 3), F(-1, 2), F(1, 6))
            + B * _poly(0, 0, F(1, 12), F(-1, 2), F(5, 12))) * H ** 2,
        6: (A * _poly(0, 0, F(2, 45), F(-5, 24), F(43, 144), F(-1, 6), F(23, 720))
            + B * _poly(0, 0, F(1, 360), F(-1, 12), F(23, 72), F(-5, 12), F(8, 45))
            + C * _poly(0, 0, 0, 0, F(1, 16), 0, F(-1, 16))) * H ** 4,
        8: (A * _poly(0, 0, F(1, 315), F(-3, 80), F(61, 480), F(-3, 16), F(49, 360),
                      F(-23, 480), F(11, 1680))
            + B * _poly(0, 0, F(1, 20160), F(-1, 160), F(13, 192), F(-11, 48),
                        F(257, 720), F(-4, 15), F(13, 168))
            + C * _poly(0, 0, 0, 0, F(1, 48), F(-1, 16), F(-1, 192), F(3, 32), F(-3, 64))
            + D * _poly(0, 0, 0, 0, 0, 0, F(1, 64), 0, F(-1, 64))) * H ** 6,
    }


# -- first-order wave -------------------------------------------------------

def wave_closure_gamma2() -> Stencil:
    """``-(gamma c/2H)(U+ - U-) + theta (gamma c/2H)(U+ - 2U + U-)``."""
    scale = g * c * sym("H", -1) * F(1, 2)
    return (Stencil({1: -1, -1: 1}) + Stencil({1: 1, 0: -2, -1: 1}) * th) * scale


def wave_field_gamma2() -> SubgridPoly:
    """``U + gamma (xi - 1/2)(mu delta - theta delta^2/2) U``."""
    return _field([
        ((1,), CONST, md(0, 0)),
        ((F(-1, 2), 1), CONST, (md(1, 1) - md(0, 2, th * F(1, 2))) * g),
    ])


def wave_closure_gamma5() -> Stencil:
    """``dU/dt`` to ``O(gamma^5)`` (all stencil widths)."""
    t2 = th * th
    s = md(1, 1, -g)
    s = s + md(0, 2, th * g * (ONE - g) * F(1, 2))
    s = s + md(1, 3, g ** 2 * (ONE - g * F(1, 3) + t2 * (ONE - g)) * F(1, 4))
    s = s + md(0, 4, th * g ** 2 * (ONE - g) * (2 - g - t2 * g) * F(-1, 8))
    s = s + md(1, 5, g ** 3 * (ParamPoly.const(F(4, 3)) - g + t2 * (4 - 6 * g) - t2 * t2 * g)
               * F(-1, 16))
    return s * (c * sym("H", -1))


def wave_equivalent_gamma6() -> dict[int, ParamPoly]:
    """Equivalent PDE of the wave closure at ``O(gamma^6)`` through ``d^5``."""
    t2 = th * th
    one_g = ONE - g
    return {
        1: -g * c,
        2: g * one_g * th * H * c * F(1, 2),
        3: g * one_g * (2 - g - 3 * t2 * g) * H ** 2 * c * F(-1, 12),
        4: g * one_g * th * (1 - 6 * g + 3 * (1 + t2) * g * g) * H ** 3 * c * F(1, 24),
        5: g * one_g * (2 - (13 + 15 * t2) * g + 12 * (1 + 5 * t2) * g ** 2
                        - 3 * (1 + 10 * t2 + 15 * t2 * t2) * g ** 3) * H ** 4 * c * F(-1, 240),
    }


# -- heterogeneous diffusion -------------------------------------------------

def het_field_gamma3() -> SubgridPoly:
    """Subgrid field of heterogeneous diffusion to ``O(gamma^3, a^3)``."""
    akh = a * sym("k", -1) * sym("H", -1)
    ak2h2 = a * sym("k", -2) * sym("H", -2)
    g2 = g * g
    return _field([
        ((1,), CONST, md(0, 0)),
        ((F(-1, 2), 1), CONST, md(1, 1, g)),
        ((1,), sin_h(1), md(1, 1, g * akh)),
        ((F(1, 12), F(-1, 2), F(1, 2)), CONST, md(0, 2, g2)),
        ((F(1, 8), F(-1, 4)), CONST, md(1, 3, g2)),
        ((F(1, 48), F(-1, 8), F(1, 8)), CONST, md(0, 4, g2)),
        ((1,), cos_h(1), (md(0, 2) + md(0, 4, F(1, 4))) * (g2 * ak2h2)),
        ((F(1, 2), -1), sin_h(1), md(0, 2, -g2 * akh)),
        ((1,), sin_h(1), md(1, 3, -g2 * akh * F(1, 4))),
        ((F(1, 8), F(-1, 4)), sin_h(1), md(0, 4, -g2 * akh)),
    ])


def het_closure_extra() -> Stencil:
    """Heterogeneity correction to ``dU/dt``: ``a^2/(2 k^2 H^4)(gamma^4 - gamma^5 delta^2) mu^4 delta^4``."""
    scale = a * a * sym("k", -2) * sym("H", -4) * F(1, 2)
    return (md(4, 4, g ** 4) - md(4, 6, g ** 5)) * scale


def het_equivalent_full_coupling() -> dict[int, ParamPoly]:
    """Equivalent PDE at full coupling, ``O(gamma^7, a^3)``, through ``d^6``."""
    return {2: ONE, 4: a * a * sym("k", -2) * F(1, 2), 6: a * a * sym("k", -4) * -2}
