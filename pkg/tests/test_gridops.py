from fractions import Fraction as F
from math import factorial

import pytest
from hypothesis import given, strategies as st

from holodisc.constructor import Diffusion, Wave1
from holodisc.exactalg import ONE, TruncSeries, sym
from holodisc.gridops import (
    DELTA, IDENTITY, MU, E, HarmonicError, Stencil, SubgridPoly, cos_h, dxi, dz,
    edge_residuals, element_mean, expand_mu_delta, linv_diffusion, linv_het, linv_wave,
    sin_h, tap_moments,
)

XI = SubgridPoly.xi_power(1)


def poly(*coeffs):
    return SubgridPoly.polynomial([F(c) for c in coeffs])


# -- stencils ------------------------------------------------------------------

def test_canonical_expansions():
    assert DELTA * DELTA == Stencil({-1: 1, 0: -2, 1: 1})
    assert MU * DELTA == Stencil({-1: F(-1, 2), 1: F(1, 2)})
    assert MU * MU == Stencil({-1: F(1, 4), 0: F(1, 2), 1: F(1, 4)})


def test_mu_squared_identity():
    assert MU * MU == IDENTITY + DELTA * DELTA * F(1, 4)


def test_half_shifts_and_width():
    assert DELTA == Stencil({F(1, 2): 1, F(-1, 2): -1})
    assert DELTA.width == 1
    assert (DELTA ** 4).width == 4
    assert (DELTA ** 4).support == (-2, 2)
    assert E(2) * E(-2) == IDENTITY


def test_no_zero_taps_stored():
    s = Stencil({0: 1, 1: 0}) + Stencil({0: -1})
    assert s.is_zero() and s.taps == {}


def test_text_form():
    assert (DELTA * DELTA).to_text() == "{-1: 1, 0: -2, 1: 1}"


def test_expand_mu_delta_matches_powers():
    for a in range(4):
        for b in range(5):
            assert expand_mu_delta({(a, b): ONE}) == MU ** a * DELTA ** b


def test_tap_moments_detect_delta_powers():
    for n in range(1, 7):
        moments = tap_moments(DELTA ** n, n)
        assert all(m == 0 for m in moments[:n])
        assert moments[n] == factorial(n)


def test_numeric_symbol():
    st_ = (DELTA * DELTA) * sym("H", -2)
    assert st_.numeric_taps({"H": 2}) == {-1: 0.25, 0: -0.5, 1: 0.25}


small_rats = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def stencils(draw):
    taps = draw(st.dictionaries(st.integers(-3, 3), small_rats, max_size=4))
    extra = draw(st.sampled_from([ONE, sym("theta"), sym("gamma") * 2]))
    return Stencil(taps) * extra


@given(stencils(), stencils(), stencils())
def test_composition_associative_commutative(a, b, c):
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@given(stencils(), stencils())
def test_composition_is_convolution(a, b):
    prod = a * b
    shifts = {r + s for r in a.taps for s in b.taps}
    for s in shifts:
        expected = sum((a.taps[r] * b.taps[s - r] for r in a.taps if s - r in b.taps), ONE * 0)
        assert prod.taps.get(s, ONE * 0) == expected


@given(stencils(), stencils())
def test_width_adds_under_composition(a, b):
    if a and b and (a * b):
        assert (a * b).width <= a.width + b.width


# -- subgrid operators -------------------------------------------------------------

def test_dxi_examples():
    assert dxi(SubgridPoly.xi_power(2)) == SubgridPoly.xi_power(1, 2)
    assert dxi(SubgridPoly.xi_power(1, harmonic=cos_h(1))) == SubgridPoly.xi_power(0, harmonic=cos_h(1))
    assert dxi(poly(F(1, 12), F(-1, 2), F(1, 2))) == poly(F(-1, 2), 1)


def test_dz_examples():
    k = sym("k")
    assert dz(SubgridPoly.xi_power(0, harmonic=cos_h(1))) == SubgridPoly.xi_power(0, -k, sin_h(1))
    assert dz(poly(3)) == SubgridPoly()
    assert dz(SubgridPoly.xi_power(0, harmonic=sin_h(2))) == SubgridPoly.xi_power(0, k * 2, cos_h(2))


def test_element_mean_examples():
    assert element_mean(poly(1)) == IDENTITY
    for p in range(6):
        assert element_mean(SubgridPoly.xi_power(p)) == Stencil.scalar(F(1, p + 1))
    assert element_mean(SubgridPoly.xi_power(1, harmonic=cos_h(1))) == Stencil()


def test_linv_diffusion_examples():
    assert linv_diffusion(poly(1)) == poly(F(1, 12), F(-1, 2), F(1, 2))
    assert linv_diffusion(XI) == poly(F(1, 24), F(-1, 6), 0, F(1, 6))
    assert linv_diffusion(SubgridPoly()) == SubgridPoly()
    with pytest.raises(HarmonicError):
        linv_diffusion(SubgridPoly.xi_power(0, harmonic=cos_h(1)))


def test_linv_wave_examples():
    assert linv_wave(poly(1)) == poly(F(-1, 2), 1)
    assert linv_wave(XI) == poly(F(-1, 6), 0, F(1, 2))
    assert linv_wave(SubgridPoly()) == SubgridPoly()


def test_linv_het_rules():
    H2, k2 = sym("H", 2), sym("k", -2)
    assert linv_het(poly(1)) == poly(F(1, 12), F(-1, 2), F(1, 2)) * H2
    assert linv_het(SubgridPoly.xi_power(0, harmonic=sin_h(1))) == \
        SubgridPoly.xi_power(0, -k2, sin_h(1))
    assert linv_het(SubgridPoly.xi_power(0, harmonic=cos_h(2))) == \
        SubgridPoly.xi_power(0, -k2 * F(1, 4), cos_h(2))
    got = linv_het(SubgridPoly.xi_power(2, harmonic=cos_h(1)))
    want = (SubgridPoly.xi_power(2, harmonic=cos_h(1)) - SubgridPoly.xi_power(1, harmonic=cos_h(1))) * -k2
    assert got == want
    assert linv_het(SubgridPoly.xi_power(1, harmonic=cos_h(1))) == SubgridPoly()


@given(st.integers(0, 9))
def test_linv_diffusion_inverts_second_derivative(p):
    v = linv_diffusion(SubgridPoly.xi_power(p))
    assert dxi(dxi(v)) == SubgridPoly.xi_power(p)
    assert v.at_xi(0) == v.at_xi(1)
    assert element_mean(v) == Stencil()


@given(st.integers(0, 9))
def test_linv_wave_inverts_first_derivative(p):
    v = linv_wave(SubgridPoly.xi_power(p))
    assert dxi(v) == SubgridPoly.xi_power(p)
    assert element_mean(v) == Stencil()


def test_harmonic_products_recombine():
    c1 = SubgridPoly.xi_power(0, harmonic=cos_h(1))
    s1 = SubgridPoly.xi_power(0, harmonic=sin_h(1))
    half = F(1, 2)
    assert c1 * c1 == SubgridPoly.xi_power(0, half) + SubgridPoly.xi_power(0, half, cos_h(2))
    assert s1 * s1 == SubgridPoly.xi_power(0, half) - SubgridPoly.xi_power(0, half, cos_h(2))
    assert c1 * s1 == SubgridPoly.xi_power(0, half, sin_h(2))


def test_at_xi_evaluates_polynomial():
    v = poly(F(1, 12), F(-1, 2), F(1, 2)) * DELTA
    assert v.at_xi(0).as_stencil() == DELTA * F(1, 12)
    assert v.at_xi(F(1, 2)).as_stencil() == DELTA * F(-1, 24)


# -- edge residuals -------------------------------------------------------------------

def _series(*terms, order=3):
    return TruncSeries(("gamma",), (order,), {(i,): t for i, t in enumerate(terms) if t})


def test_base_state_satisfies_uncoupled_edges():
    u = _series(SubgridPoly.from_stencil(IDENTITY))
    for fam in (Diffusion(), Diffusion(theta=F(1, 3)), Wave1()):
        res = edge_residuals(u, fam)
        assert all(r.get((0,)) is None for r in res.values())
        # coupling at order gamma is what drives the construction
        assert res["ucc"].get((1,)) is not None
    assert edge_residuals(u, Diffusion())["udc"].is_zero()


def test_leading_field_leaves_quadratic_residual():
    lin = SubgridPoly.from_stencil(MU * DELTA, 1) - SubgridPoly.from_stencil(MU * DELTA * F(1, 2))
    u = _series(SubgridPoly.from_stencil(IDENTITY), lin)
    res = edge_residuals(u, Diffusion(theta=0))
    assert res["ucc"].get((0,)) is None and res["ucc"].get((1,)) is None


def test_full_coupling_is_continuity():
    """At gamma = 1, theta = 0 the field residual is u_j(0) - u_{j-1}(1) averaged with its mirror."""
    v = poly(0, 1, 1) * DELTA
    u = TruncSeries(("gamma",), (2,), {(0,): v})
    res = edge_residuals(u, Diffusion(theta=0))["ucc"]
    folded = (res.fold() or SubgridPoly()).subs(gamma=1).as_stencil()
    r, l = v.at_xi(1).as_stencil(), v.at_xi(0).as_stencil()
    jump_left = l - r.translate(-1)
    jump_right = r - l.translate(1)
    assert folded == (jump_left - jump_right) * F(1, 2)
