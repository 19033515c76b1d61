"""Equivalent-PDE (modified equation) analysis of macroscale closures.

A stencil ``sum_s c_s E**s`` acting on a smooth field ``U(x)`` sampled at
spacing ``H`` is ``sum_n [sum_s c_s (s H)**n / n!] d^n U/dx^n``.  The
coefficient list is the equivalent PDE.  Substituting full coupling
``gamma = 1`` and subtracting the target operator gives the consistency
defect.

The module also expands two closed-form closures, one built on ``asinh``
for the first-order wave and one on ``asinh**2`` for diffusion, as exact
series in ``gamma``.  This gives a second route to the constructor's output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Any, Mapping

from .constructor import MacroEvolution, PdeFamily, SubgridField
from .exactalg import ParamPoly, TruncSeries, series_compose, sym
from .gridops import DELTA, IDENTITY, MU, Stencil

__all__ = [
    "EquivalentPde", "ConsistencyReport", "MidElementReport",
    "to_equivalent_pde", "consistency_report", "closed_form_gamma_series",
    "verify_midelement_identity", "asinh_coeffs", "asinh_sq_coeffs",
    "inv_sqrt_coeffs",
]


@dataclass(frozen=True)
class EquivalentPde:
    """``dU/dt = sum_n terms[n] * d^n U/dx^n`` up to derivative order ``depth``."""

    terms: dict[int, ParamPoly]
    depth: int

    def coeff(self, n: int) -> ParamPoly:
        return self.terms.get(n, ParamPoly())

    def subs(self, **values: Any) -> "EquivalentPde":
        out = {n: c.subs(**values) for n, c in self.terms.items()}
        return EquivalentPde({n: c for n, c in out.items() if c}, self.depth)

    def rows(self) -> list[tuple[int, str]]:
        return [(n, self.terms[n].to_text()) for n in sorted(self.terms)]

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return "\n".join(f"d^{n}: {t}" for n, t in self.rows())


def _as_stencil(g: MacroEvolution | TruncSeries | Stencil) -> Stencil:
    if isinstance(g, Stencil):
        return g
    if isinstance(g, MacroEvolution):
        return g.folded()
    return g.fold() or Stencil()


def to_equivalent_pde(g: MacroEvolution | TruncSeries | Stencil, taylor_depth: int) -> EquivalentPde:
    """Taylor-expand every tap ``U_{j+s}`` about ``x_j`` through ``d^M/dx^M``.

    Series variables such as ``gamma`` stay symbolic.
    """
    if taylor_depth < 2:
        raise ValueError("taylor_depth must be >= 2")
    st = _as_stencil(g)
    H = sym("H")
    terms: dict[int, ParamPoly] = {}
    for n in range(taylor_depth + 1):
        total = ParamPoly()
        for s, c in st.taps.items():
            if n and not s:
                continue
            total = total + c * (s ** n / factorial(n))
        total = total * H ** n if n else total
        if total:
            terms[n] = total
    return EquivalentPde(terms, taylor_depth)


@dataclass
class ConsistencyReport:
    coefficients: dict[int, ParamPoly]
    defects: dict[int, ParamPoly]
    depth: int

    @property
    def defect_order(self) -> int | None:
        """Lowest derivative order with a nonzero defect, ``None`` if none up to ``depth``."""
        return min(self.defects) if self.defects else None

    @property
    def consistency_order(self) -> int:
        """Defect order, or ``depth + 1`` when nothing deviates within the expansion."""
        o = self.defect_order
        return self.depth + 1 if o is None else o

    def consistent_to(self, p: int) -> bool:
        return self.consistency_order >= p

    def as_dict(self) -> dict:
        return {
            "depth": self.depth,
            "defect_order": self.defect_order,
            "coefficients": {str(n): c.to_text() for n, c in sorted(self.coefficients.items())},
            "defects": {str(n): c.to_text() for n, c in sorted(self.defects.items())},
        }


def consistency_report(e: EquivalentPde, family: PdeFamily | Mapping[int, ParamPoly]) -> ConsistencyReport:
    """Compare the full-coupling equivalent PDE with the family's target operator."""
    target = family.target_equivalent(e.depth) if isinstance(family, PdeFamily) else dict(family)
    at1 = e.subs(gamma=1)
    defects = {}
    for n in range(e.depth + 1):
        d = at1.coeff(n) - target.get(n, ParamPoly())
        if d:
            defects[n] = d
    return ConsistencyReport(dict(at1.terms), defects, e.depth)


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def asinh_coeffs(n: int) -> list[Fraction]:
    """Taylor coefficients of ``asinh(x)`` through ``x**n``."""
    out = [Fraction(0)] * (n + 1)
    for m in range((n - 1) // 2 + 1):
        out[2 * m + 1] = Fraction((-1) ** m * factorial(2 * m),
                                  4 ** m * factorial(m) ** 2 * (2 * m + 1))
    return out


def asinh_sq_coeffs(n: int) -> list[Fraction]:
    """Coefficients ``b_m`` with ``asinh(x)**2 = sum_m b_m (x**2)**m``, ``m <= n``."""
    out = [Fraction(0)] * (n + 1)
    for m in range(1, n + 1):
        out[m] = Fraction((-1) ** (m - 1) * 2 ** (2 * m - 1) * factorial(m - 1) ** 2, factorial(2 * m))
    return out


def inv_sqrt_coeffs(n: int) -> list[Fraction]:
    """Binomial coefficients of ``(1 + y)**(-1/2)`` through ``y**n``."""
    out, c = [], Fraction(1)
    for k in range(n + 1):
        out.append(c)
        c = c * (Fraction(-1, 2) - k) / (k + 1)
    return out


def _gseries(order: int, coeffs: Mapping[int, Stencil]) -> TruncSeries:
    return TruncSeries(("gamma",), (order,), {(k,): v for k, v in coeffs.items()})


def _theta(theta: Any) -> ParamPoly:
    if theta is None:
        return sym("theta")
    return theta if isinstance(theta, ParamPoly) else ParamPoly.const(theta)


def _wave_ratio(order: int, th: ParamPoly) -> TruncSeries:
    """``gamma (mu - theta delta/2) delta / sqrt(1 + Y)`` as a series."""
    d2 = DELTA * DELTA
    md = MU * DELTA
    y = _gseries(order, {1: d2 * Fraction(1, 2) - md * th,
                         2: d2 * ((th * th - 1) * Fraction(1, 4))})
    inv = series_compose(inv_sqrt_coeffs(order), y, IDENTITY)
    num = _gseries(order, {1: md - d2 * (th * Fraction(1, 2))})
    return num * inv


def _diffusion_ratio(order: int, th: ParamPoly) -> TruncSeries:
    """``gamma^2 (mu^2 - theta^2 delta^2/4) delta^2 / (1 + Y)`` as a series."""
    d2 = DELTA * DELTA
    m2 = MU * MU
    y = _gseries(order, {1: d2 * Fraction(1, 2),
                         2: d2 * ((th * th + 1) * Fraction(-1, 4))})
    inv = series_compose([(-1) ** k for k in range(order + 1)], y, IDENTITY)
    num = _gseries(order, {2: (m2 - d2 * (th * th * Fraction(1, 4))) * d2})
    return num * inv


def closed_form_gamma_series(closure: str, order: int, theta: Any = None) -> MacroEvolution:
    """Expand a closed-form closure as an exact series truncated at ``gamma**order``.

    ``closure`` is ``"wave_asinh"`` for
    ``-(2c/H) asinh[ gamma (mu - theta delta/2) delta / (2 sqrt(1 + gamma delta^2/2
    - gamma theta mu delta + gamma^2 (theta^2 - 1) delta^2/4)) ]`` or
    ``"diffusion_asinh2"`` for
    ``(4/H^2) asinh^2[ sqrt((mu^2 - theta^2 delta^2/4)/(1 + gamma delta^2/2
    - gamma^2 (theta^2 + 1) delta^2/4)) gamma delta/2 ]``.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    th = _theta(theta)
    if closure == "wave_asinh":
        x = _wave_ratio(order, th).map(lambda s: s * Fraction(1, 2))
        body = series_compose(asinh_coeffs(order), x, IDENTITY)
        body = body.map(lambda s: s * (sym("c") * sym("H", -1) * -2))
        return MacroEvolution(body, "wave")
    if closure == "diffusion_asinh2":
        x2 = _diffusion_ratio(order, th).map(lambda s: s * Fraction(1, 4))
        body = series_compose(asinh_sq_coeffs(order), x2, IDENTITY)
        body = body.map(lambda s: s * (sym("H", -2) * 4))
        return MacroEvolution(body, "diffusion")
    raise ValueError(f"unknown closure {closure!r}; use 'wave_asinh' or 'diffusion_asinh2'")


# ---------------------------------------------------------------------------
# mid-element identities
# ---------------------------------------------------------------------------

@dataclass
class MidElementReport:
    holds: bool
    lhs: TruncSeries
    rhs: TruncSeries
    difference: TruncSeries = field(repr=False)

    def as_dict(self) -> dict:
        return {"holds": self.holds,
                "difference": {str(k): str(v) for k, v in self.difference.items()}}


def _point(u: TruncSeries, x: Fraction) -> TruncSeries:
    return u.map(lambda v: v.at_xi(x).as_stencil())


def verify_midelement_identity(u: SubgridField | TruncSeries, family: PdeFamily | str,
                               theta: Any = None) -> MidElementReport:
    """Check the mid-element form of the coupling on a constructed field.

    Wave: ``u(1) - u(0)`` equals the wave ratio applied to ``u(1/2)``.
    Diffusion: ``u(3/2) - 2 u(1/2) + u(-1/2)`` (smooth polynomial extension)
    equals the diffusion ratio applied to ``u(1/2)``.  Both hold to the
    truncation order of the field.
    """
    body = u.body if isinstance(u, SubgridField) else u
    name = family if isinstance(family, str) else family.name
    if theta is None and not isinstance(family, str):
        theta = getattr(family, "theta", None)
    th = _theta(theta)
    if body.vars != ("gamma",):
        raise ValueError("mid-element identity needs a field in gamma only")
    order = body.orders[0]
    half = Fraction(1, 2)
    mid = _point(body, half)
    if name == "wave":
        lhs = _point(body, Fraction(1)) - _point(body, Fraction(0))
        rhs = _wave_ratio(order, th) * mid
    elif name in ("diffusion",):
        lhs = _point(body, Fraction(3, 2)) - mid.map(lambda s: s * 2) + _point(body, -half)
        rhs = _diffusion_ratio(order, th) * mid
    else:
        raise ValueError(f"no mid-element identity for family {name!r}")
    diff = lhs - rhs
    return MidElementReport(diff.is_zero(), lhs, rhs, diff)
