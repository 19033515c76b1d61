from fractions import Fraction as F

import pytest
import sympy as sp

from helpers import built
from holodisc import reference_forms as ref
from holodisc.constructor import Diffusion, Wave1, construct
from holodisc.equivpde import (
    asinh_coeffs, asinh_sq_coeffs, closed_form_gamma_series, consistency_report,
    inv_sqrt_coeffs, to_equivalent_pde, verify_midelement_identity,
)
from holodisc.exactalg import ONE, ParamPoly, TruncSeries, sym
from holodisc.gridops import DELTA, IDENTITY, Stencil, SubgridPoly, tap_moments

x = sp.Symbol("x")


def _sympy_coeffs(expr, n):
    ser = sp.series(expr, x, 0, n + 1).removeO()
    return [F(str(sp.Rational(ser.coeff(x, m)))) for m in range(n + 1)]


# -- series helpers against sympy --------------------------------------------------

def test_asinh_coefficients():
    assert asinh_coeffs(9) == _sympy_coeffs(sp.asinh(x), 9)


def test_asinh_squared_coefficients():
    want = _sympy_coeffs(sp.asinh(x) ** 2, 12)
    got = asinh_sq_coeffs(6)
    assert [want[2 * m] for m in range(7)] == got
    assert all(c == 0 for c in want[1::2])


def test_inverse_sqrt_coefficients():
    assert inv_sqrt_coeffs(7) == _sympy_coeffs(1 / sp.sqrt(1 + x), 7)


# -- equivalent PDE ------------------------------------------------------------------

def test_second_difference_expansion():
    """delta^2/H^2 is 4 sinh^2(H d/2)/H^2."""
    e = to_equivalent_pde(DELTA * DELTA * sym("H", -2), 10)
    want = _sympy_coeffs(4 * sp.sinh(x / 2) ** 2, 10)
    for n in range(11):
        expected = sym("H", n - 2) * want[n] if want[n] else ParamPoly()
        assert e.coeff(n) == expected


def test_depth_must_be_at_least_two():
    with pytest.raises(ValueError):
        to_equivalent_pde(DELTA, 1)


def test_zero_evolution_gives_empty_table():
    assert to_equivalent_pde(Stencil(), 4).terms == {}


def test_depth_monotonic():
    ev = built("diffusion", 5).evolution
    lo, hi = to_equivalent_pde(ev, 4), to_equivalent_pde(ev, 8)
    for n in range(5):
        assert lo.coeff(n) == hi.coeff(n)


def test_diffusion_equivalent_sixth_derivative():
    e = to_equivalent_pde(built("diffusion", 9).evolution, 8)
    g = sym("gamma")
    block = ParamPoly()
    for i, q in enumerate([0, 0, F(2, 45), F(-5, 24), F(43, 144), F(-1, 6), F(23, 720)]):
        block = block + g ** i * q
    assert e.coeff(6).subs(theta=0) == block * sym("H", 4)
    assert e.coeff(6) == ref.diffusion_equivalent_gamma9()[6]


def test_wave_second_derivative_coefficient():
    e = to_equivalent_pde(built("wave", 6).evolution, 5)
    g = sym("gamma")
    assert e.coeff(2) == g * (ONE - g) * sym("theta") * sym("H") * sym("c") * F(1, 2)


def test_wave_closure_gamma5_agrees_with_published_through_width_five():
    """The published O(gamma^5) wave closure omits stencils beyond delta^5.

    The difference from the construction must be a multiple of delta^6, so
    its tap moments vanish through order five.
    """
    diff = built("wave", 5).evolution.folded() - ref.wave_closure_gamma5()
    assert diff
    for m in tap_moments(diff, 5):
        assert m == 0


def test_wave_equivalent_fifth_derivative_erratum():
    """Only the theta^4 part of the gamma^4 bracket differs: 5 theta^4, not 15 theta^4."""
    e = to_equivalent_pde(built("wave", 6).evolution, 5)
    printed = ref.wave_equivalent_gamma6()
    for n in range(1, 5):
        assert e.coeff(n) == printed[n]
    g, t = sym("gamma"), sym("theta")
    defect = e.coeff(5) - printed[5]
    assert defect == -(t ** 4) * g ** 4 * (ONE - g) * sym("H", 4) * sym("c") * F(1, 8)


def test_wave_erratum_confirmed_by_closed_form():
    closed = to_equivalent_pde(closed_form_gamma_series("wave_asinh", 6), 5)
    built_ = to_equivalent_pde(built("wave", 6).evolution, 5)
    assert closed.coeff(5) == built_.coeff(5)


# -- consistency ----------------------------------------------------------------------------

def test_diffusion_consistency_at_full_coupling():
    e = to_equivalent_pde(built("diffusion", 9).evolution, 8)
    rep = consistency_report(e, Diffusion())
    assert rep.defect_order is None
    assert rep.coefficients == {2: ONE}


def test_wave_consistency_for_every_theta():
    e = to_equivalent_pde(built("wave", 6).evolution, 5)
    rep = consistency_report(e, Wave1())
    assert rep.defect_order is None
    assert rep.coefficients == {1: -sym("c")}


@pytest.mark.parametrize("theta,taps", [
    (1, {-1: 1, 0: -1}),     # upwind for c > 0
    (-1, {0: 1, 1: -1}),     # downwind
])
def test_one_sided_differences_at_extreme_theta(theta, taps):
    st = built("wave", 2).evolution.folded().subs(gamma=1, theta=theta)
    assert st == Stencil(taps) * (sym("c") * sym("H", -1))


def test_heterogeneous_equivalent_at_full_coupling():
    e = to_equivalent_pde(built("heterogeneous", 7, a=3).evolution, 6).subs(gamma=1)
    for n, c in ref.het_equivalent_full_coupling().items():
        assert e.coeff(n) == c
    assert not e.coeff(3) and not e.coeff(5)


def test_defect_report_lists_deviation():
    e = to_equivalent_pde(built("diffusion", 3).evolution, 6)
    rep = consistency_report(e, Diffusion())
    assert rep.defect_order == 4
    assert rep.consistent_to(3)
    assert not rep.consistent_to(5)
    assert rep.as_dict()["defect_order"] == 4


# -- closed forms -----------------------------------------------------------------------------

@pytest.mark.parametrize("order", [2, 3, 4, 5, 6])
def test_wave_closed_form_equals_construction(order):
    assert closed_form_gamma_series("wave_asinh", order).folded() == \
        built("wave", order).evolution.folded()


@pytest.mark.parametrize("order", [2, 3, 4, 5, 6])
def test_diffusion_closed_form_equals_construction(order):
    assert closed_form_gamma_series("diffusion_asinh2", order).folded() == \
        built("diffusion", order).evolution.folded()


def test_closed_form_at_full_coupling_is_continuum_operator():
    e = to_equivalent_pde(closed_form_gamma_series("wave_asinh", 7), 6)
    rep = consistency_report(e, Wave1())
    assert rep.defect_order is None
    e = to_equivalent_pde(closed_form_gamma_series("diffusion_asinh2", 7), 6)
    assert consistency_report(e, Diffusion()).defect_order is None


def test_closed_form_rejects_unknown_name():
    with pytest.raises(ValueError):
        closed_form_gamma_series("heat_tanh", 3)


# -- mid-element identities ---------------------------------------------------------------------

@pytest.mark.parametrize("name,p", [("diffusion", 2), ("diffusion", 5), ("wave", 2), ("wave", 5)])
def test_midelement_identity_holds(name, p):
    r = built(name, p)
    assert verify_midelement_identity(r.field, r.family).holds


def test_midelement_identity_numeric_theta():
    r = construct(Diffusion(theta=0), {"gamma": 3})
    assert verify_midelement_identity(r.field, "diffusion", theta=0).holds


def test_midelement_base_state_both_sides_zero():
    u = TruncSeries(("gamma",), (1,), {(0,): SubgridPoly.from_stencil(IDENTITY)})
    rep = verify_midelement_identity(u, "wave")
    assert rep.holds and rep.lhs.is_zero() and rep.rhs.is_zero()


def test_midelement_detects_wrong_field():
    r = built("wave", 3)
    bad = r.field.body + TruncSeries(("gamma",), (3,),
                                     {(2,): SubgridPoly.from_stencil(DELTA * DELTA, 1)})
    assert not verify_midelement_identity(bad, r.family).holds
