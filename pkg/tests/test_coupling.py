import math
import random
from fractions import Fraction as F

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from holodisc.coupling import (
    DegenerateConstraints, ElementEnsemble, NonPositiveDiffusivity, build_coupling,
    circulant_eigs_V, is_exceptional, random_ensemble, self_adjointness_defect,
    spectral_dichotomy,
)

XI = sp.Symbol("xi")
unit_rats = st.fractions(min_value=-1, max_value=1, max_denominator=10)
gammas = st.fractions(min_value=0, max_value=1, max_denominator=10)


def test_uncoupled_matrices_are_identity():
    cm = build_coupling(5, 0, F(3, 7))
    assert cm.C_plus == sp.eye(5) and cm.C_minus == sp.eye(5)


def test_matrix_entries():
    cm = build_coupling(3, F(1, 2), F(1, 3))
    assert cm.C_plus[0, 0] == sp.Rational(2, 3)
    assert cm.C_plus[0, 2] == sp.Rational(1, 3)
    assert cm.C_minus[1, 0] == sp.Rational(1, 6)
    assert cm.is_circulant()


def test_exceptional_zigzag_case():
    cm = build_coupling(4, 1, 0)
    assert cm.det_plus == 0 and cm.det_minus == 0
    assert is_exceptional(4, 1, 0)
    assert not is_exceptional(3, 1, 0)
    assert build_coupling(3, 1, 0).det_plus == sp.Rational(1, 4)


def test_single_element_rejected():
    with pytest.raises(ValueError):
        build_coupling(1, F(1, 2), 0)


@settings(max_examples=50)
@given(st.integers(2, 12), gammas, unit_rats)
def test_commutativity(N, g, t):
    assert build_coupling(N, g, t).commutes()


@settings(max_examples=30)
@given(st.integers(2, 8), gammas, unit_rats)
def test_determinant_formula_matches_elimination(N, g, t):
    cm = build_coupling(N, g, t)
    assert cm.C_plus.det(method="bareiss") == cm.det_plus
    assert cm.C_minus.det(method="bareiss") == cm.det_minus


def test_circulant_eigenvalues():
    spectrum = circulant_eigs_V(4, 0.0)
    assert spectrum.zero_modes == [2]
    assert abs(spectrum.eigenvalues[0] - 1) < 1e-15
    assert circulant_eigs_V(5, 0.3).zero_modes == []
    assert all(abs(v) > 0 for v in circulant_eigs_V(5, 0.3).eigenvalues)
    assert circulant_eigs_V(6, 0.1).zero_modes == []


@pytest.mark.parametrize("N,g,t,D", [
    (5, 0, F(1, 3), 4),
    (5, F(7, 10), F(3, 10), 5),
    (3, 1, 0, 3),
    (6, F(1, 2), F(-1, 2), 4),
    (2, F(1, 3), 1, 3),
])
def test_self_adjoint_defect_is_exactly_zero(N, g, t, D):
    ens = random_ensemble(random.Random(N * 100 + D), N, D)
    rep = self_adjointness_defect(ens, g, t, trials=3, seed=1)
    assert rep.defect == 0 and rep.exact_zero
    assert not rep.exceptional


def test_exceptional_case_is_flagged():
    ens = random_ensemble(random.Random(3), 4, 3)
    rep = self_adjointness_defect(ens, 1, 0, trials=4, seed=2)
    assert rep.exceptional
    assert rep.defect != 0


def test_explicit_field_pair_must_satisfy_constraints():
    ens = random_ensemble(random.Random(0), 3, 2, hetero=False)
    with pytest.raises(ValueError):
        self_adjointness_defect(ens, F(1, 2), 0, fields=([1] * 9, [0] * 9))


def test_constant_fields_have_zero_defect():
    ens = random_ensemble(random.Random(0), 3, 2, hetero=False)
    const = [1, 0, 0] * 3
    rep = self_adjointness_defect(ens, F(1, 2), F(1, 5), fields=(const, const))
    assert rep.defect == 0


def test_degenerate_constraints():
    # linear elements on three cells leave only the constant field
    ens = random_ensemble(random.Random(0), 3, 1)
    with pytest.raises(DegenerateConstraints):
        self_adjointness_defect(ens, F(1, 2), 0)


def test_non_positive_diffusivity_rejected():
    bad = sp.Poly(XI - sp.Rational(1, 2), XI, domain="QQ")
    good = sp.Poly(sp.Integer(1), XI, domain="QQ")
    with pytest.raises(NonPositiveDiffusivity):
        ElementEnsemble(2, 3, [good, bad])


@settings(max_examples=15)
@given(st.integers(2, 5), st.integers(2, 4), gammas, unit_rats, st.integers(0, 10 ** 6))
def test_self_adjoint_random(N, D, g, t, seed):
    if is_exceptional(N, g, t):
        return
    ens = random_ensemble(random.Random(seed), N, D)
    try:
        rep = self_adjointness_defect(ens, g, t, trials=2, seed=seed)
    except DegenerateConstraints:
        return
    assert rep.defect == 0


# -- spectral dichotomy ----------------------------------------------------------------

def test_dichotomy_uniform():
    rep = spectral_dichotomy(4, 1.0, None, 64)
    assert rep.n_zero == 4
    assert abs(rep.gap + 4 * math.pi ** 2) < 0.01 * 4 * math.pi ** 2
    assert rep.dichotomy_holds


def test_dichotomy_single_element():
    rep = spectral_dichotomy(1, 2.0, None, 64)
    assert rep.n_zero == 1
    assert rep.gap <= -rep.beta * (1 - rep.eps_disc)


def test_dichotomy_heterogeneous():
    H = 1.0
    d = H / 8

    def kappa(x):
        return 1 / (1 + 0.5 * np.cos(2 * np.pi * x / d))

    rep = spectral_dichotomy(3, H, kappa, 128)
    assert rep.n_zero == 3
    assert abs(rep.beta - 4 * math.pi ** 2 * (2 / 3) / H ** 2) < 1e-3
    assert rep.dichotomy_holds


def test_dichotomy_rejects_negative_kappa():
    with pytest.raises(NonPositiveDiffusivity):
        spectral_dichotomy(2, 1.0, lambda x: np.cos(2 * np.pi * x), 16)
