"""Iterative slow-manifold construction of holistic discretisations.

Starting from the piecewise-constant state ``u_j = U_j`` with no evolution,
each pass evaluates the PDE residual, the edge-condition residuals and the
amplitude residual, then applies a family specific correction.  The loop
exits only when every residual is exactly zero at the requested truncation.

Typical use::

    >>> from holodisc.constructor import Diffusion, construct
    >>> res = construct(Diffusion(), {"gamma": 3})
    >>> res.iterations
    3
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

from .exactalg import ONE, ParamPoly, TruncSeries, as_rat, series_mul, sym
from .gridops import (
    IDENTITY, Stencil, SubgridPoly, cos_h, dxi, dz, element_mean,
    linv_diffusion, linv_het, linv_wave,
)

__all__ = [
    "NonConvergence", "PdeFamily", "Diffusion", "LatticeDiffusion",
    "AdvectionDiffusion", "Wave1", "HeterogeneousDiffusion",
    "SubgridField", "MacroEvolution", "ConstructionResult",
    "construct", "time_derivative", "residuals", "family_from_name",
]

MAX_ITERS = 99

_HALF = Fraction(1, 2)
_INV_H = sym("H", -1)
_XI_MINUS_HALF = SubgridPoly.polynomial([-_HALF, 1])


class NonConvergence(RuntimeError):
    """Residuals were still nonzero after the iteration budget."""


def _theta_poly(theta: Any) -> ParamPoly:
    if theta is None:
        return sym("theta")
    if isinstance(theta, ParamPoly):
        return theta
    return ParamPoly.const(as_rat(theta))


def _at(u: SubgridPoly, x: int) -> SubgridPoly:
    return u.at_xi(x)


def time_derivative(u: TruncSeries, g: TruncSeries) -> TruncSeries:
    """``d/dt`` of a field linear in the ``U``'s, given ``dU_j/dt = g``.

    Each tap ``E**s`` of ``u`` picks up the shift-``s`` image of ``g``; since
    all stencils commute this is the series product ``u * g``.
    """
    return series_mul(u, g, mul=lambda f, st: f * st)


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

class PdeFamily:
    """Base class.  Subclasses define the PDE, edge residuals and update."""

    name = "family"
    series_vars: tuple[str, ...] = ("gamma",)
    default_orders: dict[str, int] = {}
    residual_names: tuple[str, ...] = ("pde", "ucc", "udc", "amp")

    def orders_tuple(self, orders: Mapping[str, int]) -> tuple[int, ...]:
        unknown = set(orders) - set(self.series_vars)
        if unknown:
            raise ValueError(f"{self.name}: no series variable(s) {sorted(unknown)}")
        out = []
        for v in self.series_vars:
            o = orders.get(v, self.default_orders.get(v))
            if o is None:
                raise ValueError(f"{self.name}: missing truncation order for {v!r}")
            if int(o) < 1:
                raise ValueError(f"{self.name}: order of {v!r} must be >= 1, got {o}")
            out.append(int(o))
        return tuple(out)

    def params(self) -> dict[str, str]:
        return {}

    # -- hooks -------------------------------------------------------------
    def rhs(self, u: TruncSeries) -> TruncSeries:
        raise NotImplementedError

    def edges(self, u: TruncSeries) -> dict[str, TruncSeries]:
        raise NotImplementedError

    def update(self, u, g, res):
        raise NotImplementedError

    def target_equivalent(self, depth: int) -> dict[int, ParamPoly]:
        """Equivalent-PDE coefficients of the target operator, keyed by derivative order."""
        raise NotImplementedError

    def pde(self, u: TruncSeries, g: TruncSeries) -> TruncSeries:
        return self.rhs(u) - time_derivative(u, g)

    def __repr__(self) -> str:
        ps = ", ".join(f"{k}={v}" for k, v in self.params().items())
        return f"{type(self).__name__}({ps})"


def _symmetric_edge(f: TruncSeries, theta: ParamPoly) -> TruncSeries:
    """Residual of the symmetric edge condition on a field series ``f``."""
    def base(v: SubgridPoly) -> SubgridPoly:
        return _at(v, 0) - _at(v, 1)

    def coupled(v: SubgridPoly) -> SubgridPoly:
        r, l = _at(v, 1), _at(v, 0)
        lp, rm = l.translate(1), r.translate(-1)
        out = (r - l + lp - rm) * _HALF
        if theta:
            out = out + (r + l - lp - rm) * (theta * _HALF)
        return out

    return f.map(base) + f.map(coupled).shift(gamma=1)


class Diffusion(PdeFamily):
    """``u_t = u_xx`` on coupled elements with tuning ``theta`` (symbolic by default)."""

    name = "diffusion"

    def __init__(self, theta: Any = None):
        self.theta = _theta_poly(theta)

    def params(self):
        return {"theta": str(self.theta)}

    def second_derivative(self, u: TruncSeries) -> TruncSeries:
        h2 = sym("H", -2)
        return u.map(lambda v: dxi(dxi(v)) * h2)

    def rhs(self, u):
        return self.second_derivative(u)

    def edges(self, u):
        ux = u.map(lambda v: dxi(v) * _INV_H)
        return {"ucc": _symmetric_edge(u, self.theta),
                "udc": _symmetric_edge(ux, -self.theta)}

    def update(self, u, g, res):
        pde, ucc, udc = res["pde"], res["ucc"], res["udc"]
        gd = udc.map(lambda v: v.as_stencil() * _INV_H) - pde.map(element_mean)
        h2 = sym("H", 2)
        lift = (pde - gd.map(SubgridPoly.from_stencil)).map(lambda v: linv_diffusion(v) * h2)
        corr = ucc.map(lambda v: _XI_MINUS_HALF * v.as_stencil())
        return u - lift + corr, g + gd

    def target_equivalent(self, depth):
        return {2: ONE}


class LatticeDiffusion(Diffusion):
    """Lattice diffusion ``(u(x+dH) - 2u + u(x-dH))/(dH)^2`` inside each element."""

    name = "lattice_diffusion"

    def __init__(self, theta: Any = None, d: Any = None):
        super().__init__(theta)
        self.d = sym("d") if d is None else ParamPoly.const(as_rat(d))

    def params(self):
        return {"theta": str(self.theta), "d": str(self.d)}

    def second_derivative(self, u):
        inv = ONE / (self.d * self.d * sym("H", 2))
        d = self.d

        def lattice(v: SubgridPoly) -> SubgridPoly:
            return (v.substitute_xi_shift(d) - v * 2 + v.substitute_xi_shift(-d)) * inv

        return u.map(lattice)

    def target_equivalent(self, depth):
        from math import factorial
        dh = self.d * sym("H")
        return {2 * m: (dh ** (2 * m - 2)) * Fraction(2, factorial(2 * m))
                for m in range(1, depth // 2 + 1)}


class AdvectionDiffusion(Diffusion):
    """``u_t = -c u_x + u_xx``; ``c`` is a series variable truncated at ``c^3`` by default."""

    name = "advection_diffusion"
    series_vars = ("gamma", "c")
    default_orders = {"c": 3}

    def rhs(self, u):
        adv = u.map(lambda v: dxi(v) * (-_INV_H)).shift(c=1)
        return self.second_derivative(u) + adv

    def target_equivalent(self, depth):
        return {1: -sym("c"), 2: ONE}


class Wave1(PdeFamily):
    """First-order wave ``u_t = -c u_x`` with optional perturbation or lattice form.

    The perturbation ``alpha*(c0 u + c2 u_xx + c3 u_xxx + c4 u_xxxx)`` makes
    ``alpha`` a series variable.  With ``lattice=True`` the derivative is the
    centred lattice difference ``(u(x+dH) - u(x-dH))/(2dH)``.
    """

    name = "wave"
    residual_names = ("pde", "ucc", "amp")

    def __init__(self, theta: Any = None, perturbation: bool = False, lattice: bool = False,
                 d: Any = None):
        self.theta = _theta_poly(theta)
        self.perturbation = perturbation
        self.lattice = lattice
        self.d = sym("d") if d is None else ParamPoly.const(as_rat(d))
        self.series_vars = ("gamma", "alpha") if perturbation else ("gamma",)
        self.default_orders = {"alpha": 2} if perturbation else {}

    def params(self):
        out = {"theta": str(self.theta)}
        if self.perturbation:
            out["perturbation"] = "true"
        if self.lattice:
            out["d"] = str(self.d)
        return out

    def rhs(self, u):
        c = sym("c")
        if self.lattice:
            d = self.d
            scale = c * _INV_H * Fraction(-1, 2) / d

            def adv(v):
                return (v.substitute_xi_shift(d) - v.substitute_xi_shift(-d)) * scale
        else:
            def adv(v):
                return dxi(v) * (-c * _INV_H)
        out = u.map(adv)
        if self.perturbation:
            def pert(v):
                d1 = dxi(v)
                d2 = dxi(d1)
                d3 = dxi(d2)
                d4 = dxi(d3)
                return (v * sym("c0") + d2 * (sym("c2") * sym("H", -2))
                        + d3 * (sym("c3") * sym("H", -3)) + d4 * (sym("c4") * sym("H", -4)))
            out = out + u.map(pert).shift(alpha=1)
        return out

    def edges(self, u):
        th = self.theta
        c = sym("c")
        plus, minus = (ONE + th) * _HALF, (ONE - th) * _HALF

        def base(v):
            r, l = _at(v, 1) * c, _at(v, 0) * c
            return (r - l) * plus - (l - r) * minus

        def coupled(v):
            r, l = _at(v, 1) * c, _at(v, 0) * c
            return (r.translate(-1) - r) * plus - (l.translate(1) - l) * minus

        return {"ucc": u.map(base) + u.map(coupled).shift(gamma=1)}

    def update(self, u, g, res):
        pde, ucc = res["pde"], res["ucc"]
        gd = ucc.map(lambda v: v.as_stencil() * _INV_H)
        scale = sym("H") * sym("c", -1)
        lift = (pde - gd.map(SubgridPoly.from_stencil)).map(lambda v: linv_wave(v) * scale)
        return u + lift, g + gd

    def target_equivalent(self, depth):
        c = sym("c")
        if self.lattice:
            from math import factorial
            dh = self.d * sym("H")
            out = {2 * m + 1: -c * (dh ** (2 * m)) * Fraction(1, factorial(2 * m + 1))
                   for m in range(0, (depth - 1) // 2 + 1)}
        else:
            out = {1: -c}
        return out


class HeterogeneousDiffusion(PdeFamily):
    """``u_t = (kappa u_x)_x`` with ``kappa = 1/(1 + a cos kx)`` embedded as ``kappa(z)``.

    The field depends on ``(xi, z)``; ``x``-derivatives act as ``d/dx + d/dz``.
    ``a`` is a series variable; ``theta`` is fixed to zero.
    """

    name = "heterogeneous"
    series_vars = ("gamma", "a")
    default_orders = {"a": 3}

    def __init__(self):
        self.theta = ParamPoly()

    def kappa(self, orders: tuple[int, ...]) -> TruncSeries:
        cos1 = SubgridPoly.xi_power(0, -1, harmonic=cos_h(1))
        one = SubgridPoly.xi_power(0, 1)
        base = TruncSeries(self.series_vars, orders, {(0, 1): cos1})
        total = TruncSeries.constant(self.series_vars, orders, one)
        power = TruncSeries.constant(self.series_vars, orders, one)
        while True:
            power = power * base
            if power.is_zero():
                break
            total = total + power
        return total

    def rhs(self, u):
        kappa = self.kappa(u.orders)
        grad = u.map(lambda v: dxi(v) * _INV_H + dz(v))
        flux = kappa * grad
        return flux.map(lambda v: dxi(v) * _INV_H + dz(v))

    def edges(self, u):
        ux = u.map(lambda v: dxi(v) * _INV_H)
        return {"ucc": _symmetric_edge(u, self.theta),
                "udc": _symmetric_edge(ux, self.theta)}

    def update(self, u, g, res):
        pde, ucc, udc = res["pde"], res["ucc"], res["udc"]
        gd = udc.map(lambda v: element_mean(v) * _INV_H) + pde.map(element_mean)
        lift = (pde - gd.map(SubgridPoly.from_stencil)).map(linv_het)
        corr = ucc.map(lambda v: _XI_MINUS_HALF * v)
        return u - lift + corr, g + gd

    def target_equivalent(self, depth):
        return {2: ONE}


_FAMILIES = {
    "diffusion": Diffusion,
    "lattice_diffusion": LatticeDiffusion,
    "advection_diffusion": AdvectionDiffusion,
    "wave": Wave1,
    "heterogeneous": HeterogeneousDiffusion,
}


def family_from_name(name: str, **params: Any) -> PdeFamily:
    """Instantiate a family by its registry name."""
    try:
        cls = _FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown family {name!r}; choose from {sorted(_FAMILIES)}") from None
    return cls(**params)


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubgridField:
    """Series in the coupling parameter of subgrid polynomials."""

    body: TruncSeries
    family: str

    def coeff(self, **powers: int) -> SubgridPoly:
        return self.body.coeff_of(**powers) or SubgridPoly()

    def folded(self) -> SubgridPoly:
        return self.body.fold() or SubgridPoly()


@dataclass(frozen=True)
class MacroEvolution:
    """Series in the coupling parameter of stencils: ``dU_j/dt = G U``."""

    body: TruncSeries
    family: str

    @property
    def order(self) -> int:
        return self.body.orders[0]

    def coeff(self, **powers: int) -> Stencil:
        return self.body.coeff_of(**powers) or Stencil()

    def folded(self) -> Stencil:
        """All series variables folded in as symbols."""
        return self.body.fold() or Stencil()

    def width(self) -> Fraction:
        return self.folded().width

    def gamma_widths(self) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for key, st in self.body.items():
            out[key[0]] = max(out.get(key[0], Fraction(0)), st.width)
        return out

    def subs(self, **values: Any) -> "MacroEvolution":
        return MacroEvolution(self.body.map(lambda s: s.subs(**values)), self.family)


@dataclass
class ConstructionResult:
    family: PdeFamily
    orders: dict[str, int]
    field: SubgridField
    evolution: MacroEvolution
    iterations: int
    residuals: dict[str, bool] = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return bool(self.residuals) and all(self.residuals.values())


def residuals(family: PdeFamily, u: TruncSeries, g: TruncSeries) -> dict[str, TruncSeries]:
    """All residuals of ``(u, g)``: pde, edge conditions and amplitude."""
    res = {"pde": family.pde(u, g)}
    res.update(family.edges(u))
    mean = u.map(element_mean)
    res["amp"] = mean - TruncSeries.constant(u.vars, u.orders, IDENTITY)
    return res


def construct(family: PdeFamily, orders: Mapping[str, int] | None = None,
              max_iters: int = MAX_ITERS, trace=None) -> ConstructionResult:
    """Drive every residual to exact zero at the requested truncation orders."""
    orders = dict(orders or {})
    otuple = family.orders_tuple(orders)
    vars_ = family.series_vars
    u = TruncSeries.constant(vars_, otuple, SubgridPoly.from_stencil(IDENTITY))
    g = TruncSeries(vars_, otuple, {})
    for it in range(1, max_iters + 1):
        res = residuals(family, u, g)
        if trace is not None:
            trace(it, {k: len(v) for k, v in res.items()})
        if all(v.is_zero() for v in res.values()):
            return ConstructionResult(
                family=family, orders=dict(zip(vars_, otuple)),
                field=SubgridField(u, family.name), evolution=MacroEvolution(g, family.name),
                iterations=it, residuals={k: True for k in res})
        u, g = family.update(u, g, res)
    raise NonConvergence(
        f"{family!r} did not converge in {max_iters} iterations at orders {dict(zip(vars_, otuple))}")
