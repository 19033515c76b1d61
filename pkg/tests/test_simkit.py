import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holodisc.gridops import DELTA, MU
from holodisc.exactalg import sym
from holodisc.simkit import (
    GridMismatch, NonFinite, RunConfig, SimGrid, StencilWiderThanGrid, Trajectory,
    bloch_rate, breather_initial, coarse_samples, compare_runs, dispersion_measure,
    fit_decay_rate, het_fine_rhs, het_holistic_rhs, nls_fine_rhs, nls_holistic_rhs,
    numeric_taps, predicted_het_rate, read_trajectory_csv, rk4_integrate, run_breather,
    stencil_rate, write_trajectory_csv,
)


def plane(n, wavenumber, amp=1.0):
    grid = SimGrid(0.0, 2 * math.pi, n)
    return grid, amp * np.exp(1j * wavenumber * grid.x)


# -- NLS right-hand sides -----------------------------------------------------------

@pytest.mark.parametrize("wavenumber", [1, 3, 7])
@pytest.mark.parametrize("alpha", [-1.0, 0.0, 0.5])
def test_fine_nls_plane_wave(wavenumber, alpha):
    grid, u = plane(64, wavenumber, 0.7)
    h = grid.h
    rate = 1j * ((math.cos(wavenumber * h) - 1) / h ** 2 - alpha * 0.49)
    assert np.allclose(nls_fine_rhs(u, h, alpha), rate * u, atol=1e-10)


@pytest.mark.parametrize("wavenumber", [1, 2, 5])
@pytest.mark.parametrize("gamma", [0.5, 1.0])
def test_holistic_linear_dispersion(wavenumber, gamma):
    grid, U = plane(32, wavenumber)
    H = grid.h
    rate = -1j * gamma ** 2 * (1 - math.cos(2 * wavenumber * H)) / (4 * H * H)
    assert np.allclose(nls_holistic_rhs(U, H, 0.0, gamma), rate * U, atol=1e-10)


def test_holistic_long_wave_limit():
    grid, U = plane(4096, 1)
    got = nls_holistic_rhs(U, grid.h, 0.0) / U
    assert np.allclose(got, -0.5j, atol=1e-5)


def test_constant_field_without_nonlinearity():
    U = np.full(16, 2 - 1j)
    assert np.allclose(nls_holistic_rhs(U, 0.3, 0.0), 0)
    assert np.allclose(nls_fine_rhs(U, 0.3, 0.0), 0)


@pytest.mark.parametrize("gamma", [0.0, 0.5, 1.0])
def test_uniform_field_nonlinear_shift(gamma):
    A = 0.6 + 0.8j
    alpha = -1.3
    U = np.full(12, A)
    want = -1j * alpha * A * abs(A) ** 2 * (1 - 5 * gamma ** 2 / 48)
    assert np.allclose(nls_holistic_rhs(U, 0.2, alpha, gamma), want)


@settings(max_examples=20)
@given(st.integers(0, 2 ** 31), st.floats(-3, 3))
def test_linear_holistic_superposition(seed, scale):
    rng = np.random.default_rng(seed)
    U = rng.normal(size=10) + 1j * rng.normal(size=10)
    V = rng.normal(size=10) + 1j * rng.normal(size=10)
    f = lambda w: nls_holistic_rhs(w, 0.4, 0.0)
    assert np.allclose(f(U + scale * V), f(U) + scale * f(V))


def test_fine_nls_mass_conservation():
    grid = SimGrid(-math.pi, math.pi, 256)
    u0 = breather_initial(grid.x)
    traj = rk4_integrate(lambda u: nls_fine_rhs(u, grid.h, -1.0), u0, 1e-5, 0.02)
    mass = np.sum(np.abs(traj.states) ** 2, axis=1) * grid.h
    assert abs(mass[-1] - mass[0]) / mass[0] < 1e-8


# -- heterogeneous diffusion ---------------------------------------------------------

def test_homogeneous_fine_symbol():
    grid = SimGrid(0.0, 2 * math.pi, 50)
    u = np.cos(3 * grid.x)
    want = -(2 - 2 * math.cos(3 * grid.h)) / grid.h ** 2 * u
    assert np.allclose(het_fine_rhs(u, grid, 0.0, 8.0), want)


@settings(max_examples=25)
@given(st.integers(0, 2 ** 31), st.floats(-0.9, 0.9), st.floats(0.0, 1.0))
def test_fine_diffusion_conserves_total(seed, a, phi):
    grid = SimGrid(0.0, 2 * math.pi, 40)
    u = np.random.default_rng(seed).normal(size=40)
    assert abs(np.sum(het_fine_rhs(u, grid, a, 5.0, phi))) < 1e-12 * 40 / grid.h ** 2


@pytest.mark.parametrize("shift", [1, 3, 7])
def test_phase_shift_is_translation(shift):
    grid = SimGrid(0.0, 2 * math.pi, 48)
    u = np.random.default_rng(shift).normal(size=48)
    direct = het_fine_rhs(u, grid, 0.4, 6.0, phi=shift * grid.h)
    moved = np.roll(het_fine_rhs(np.roll(u, shift), grid, 0.4, 6.0), -shift)
    assert np.allclose(direct, moved)


def test_holistic_closure_application():
    taps = {-1: 1.0, 0: -2.0, 1: 1.0}
    grid = SimGrid(0.0, 2 * math.pi, 20)
    U = np.cos(2 * grid.x)
    assert np.allclose(het_holistic_rhs(U, taps), (2 * math.cos(2 * grid.h) - 2) * U)
    assert stencil_rate(taps, 2, grid.h) == pytest.approx(2 * math.cos(2 * grid.h) - 2)


def test_symbolic_stencil_is_evaluated():
    st_ = DELTA * DELTA * sym("H", -2) * sym("gamma")
    U = np.arange(6.0) ** 2
    got = het_holistic_rhs(U, st_, {"H": 0.5})
    assert np.allclose(got[1:-1], 8.0)
    assert numeric_taps(st_, {"H": 1, "gamma": 1}) == {-1: 1.0, 0: -2.0, 1: 1.0}


def test_half_shift_taps_rejected():
    with pytest.raises(ValueError):
        numeric_taps(MU, {})


def test_stencil_wider_than_grid():
    with pytest.raises(StencilWiderThanGrid):
        het_holistic_rhs(np.zeros(5), {-3: 1.0, 3: 1.0})
    het_holistic_rhs(np.zeros(7), {-3: 1.0, 3: 1.0})


def test_stability_guard():
    RunConfig("fine", 1e-4, 1.0, 0.1).check_stability(0.1, 0.5)
    with pytest.raises(ValueError):
        RunConfig("fine", 1e-2, 1.0, 0.1).check_stability(0.1, 0.5)


# -- time stepping ------------------------------------------------------------------

def test_rk4_exponential_decay():
    traj = rk4_integrate(lambda u: -u, np.array([1.0]), 0.01, 1.0)
    assert abs(traj.states[-1, 0] - math.exp(-1)) < 1e-6
    assert traj.times[-1] == pytest.approx(1.0)


def test_rk4_rotation_and_cadence():
    traj = rk4_integrate(lambda u: 1j * u, np.array([1.0 + 0j]), 1e-3, 1.0, cadence=0.25)
    assert np.allclose(traj.times, [0, 0.25, 0.5, 0.75, 1.0])
    assert np.allclose(traj.states[:, 0], np.exp(1j * traj.times), atol=1e-10)


def test_rk4_fourth_order():
    errs = []
    for dt in (0.1, 0.05):
        traj = rk4_integrate(lambda u: -u, np.array([1.0]), dt, 1.0)
        errs.append(abs(traj.states[-1, 0] - math.exp(-1)))
    assert 14 < errs[0] / errs[1] < 18


def test_blow_up_reports_last_finite_state():
    with pytest.raises(NonFinite) as info, np.errstate(over="ignore", invalid="ignore"):
        rk4_integrate(lambda u: u ** 3, np.array([5.0]), 0.1, 10.0, cadence=0.1)
    traj = info.value.trajectory
    assert np.all(np.isfinite(traj.states))
    assert len(traj.times) >= 1


# -- comparisons ------------------------------------------------------------------------

def _traj(n, times=(0.0, 1.0), seed=0):
    rng = np.random.default_rng(seed)
    return Trajectory(np.array(times), rng.normal(size=(len(times), n)) + 1.0,
                      np.linspace(0, 1, n, endpoint=False))


def test_identical_runs_compare_to_zero():
    t = _traj(16)
    m = compare_runs(t, t)
    assert m["max_rel_l2"] == 0 and m["max_max_abs"] == 0


def test_coarse_subset_comparison():
    fine = _traj(16)
    coarse = Trajectory(fine.times, fine.states[:, ::4], fine.x[::4])
    assert compare_runs(fine, coarse)["max_rel_l2"] == 0


def test_grid_mismatch():
    with pytest.raises(GridMismatch):
        compare_runs(_traj(16), _traj(5))
    with pytest.raises(GridMismatch):
        compare_runs(_traj(16), _traj(8, times=(0.0, 0.5)))
    shifted = Trajectory(np.array([0.0, 1.0]), np.ones((2, 4)), np.linspace(0.1, 1.1, 4, endpoint=False))
    with pytest.raises(GridMismatch):
        compare_runs(_traj(16), shifted)


def test_nearest_node_sampling():
    fine = _traj(3300)
    coarse = SimGrid(0.0, 1.0, 151)
    sub = coarse_samples(fine, coarse)
    idx = np.rint(coarse.x * 3300).astype(int)
    assert np.array_equal(sub.states, fine.states[:, idx])
    assert np.max(np.abs(fine.x[idx] - coarse.x)) <= 0.5 / 3300 + 1e-15


def test_holistic_error_shrinks_with_resolution():
    errs = []
    for N in (32, 64):
        _, _, m = run_breather(n_fine=512, n_coarse=N, T=0.2, dt_fine=5e-5,
                               dt_coarse=2e-4, cadence=0.1)
        errs.append(m["max_rel_l2"])
    assert errs[1] < errs[0] / 2


@pytest.mark.parametrize("complex_data", [False, True])
def test_csv_round_trip(tmp_path, complex_data):
    t = _traj(5, times=(0.0, 0.1, 0.2))
    if complex_data:
        t = Trajectory(t.times, t.states + 1j * t.states[::-1], t.x)
    paths = write_trajectory_csv(str(tmp_path / "run.csv"), t)
    assert len(paths) == (2 if complex_data else 1)
    back = read_trajectory_csv(paths[0])
    assert np.array_equal(back.times, t.times)
    assert np.array_equal(back.states, t.states)
    assert not list(tmp_path.glob("*.tmp"))


# -- dispersion ---------------------------------------------------------------------------

def test_bloch_rate_homogeneous():
    M, k = 128, 4.0
    h = 2 * math.pi / k / M
    assert bloch_rate(0.0, k, 1.0, M) == pytest.approx(-(2 - 2 * math.cos(h)) / h ** 2, rel=1e-10)


def test_bloch_rate_matches_prediction_for_fine_structure():
    a, k = 0.5, 16 * math.pi
    for K in (1.0, 2.0):
        assert bloch_rate(a, k, K) == pytest.approx(predicted_het_rate(a, k, K), rel=1e-5)


def test_homogenised_rate_is_harmonic_mean():
    a, k = 0.5, 40.0
    # harmonic mean of 1/(1 + a cos) is one
    assert bloch_rate(a, k, 0.5) / 0.25 == pytest.approx(-1.0, rel=1e-3)


def test_fine_run_decay():
    rate = dispersion_measure("fine_run", 1.0, a=0.0, k=4.0, fine_points=128)
    assert rate == pytest.approx(-1.0, rel=1e-3)


def test_fit_decay_rate_exact_exponential():
    x = np.linspace(0, 2 * math.pi, 32, endpoint=False)
    times = np.linspace(0, 1, 5)
    states = np.exp(-3 * times)[:, None] * np.cos(2 * x)[None, :]
    assert fit_decay_rate(Trajectory(times, states), x, 2) == pytest.approx(-3)


def test_dispersion_measure_dispatch():
    taps = {-1: 1.0, 0: -2.0, 1: 1.0}
    assert dispersion_measure("holistic", 1.0, a=0, k=1, H=0.1, taps=taps) == \
        pytest.approx(2 * math.cos(0.1) - 2)
    with pytest.raises(ValueError):
        dispersion_measure("holistic", 1.0, a=0, k=1)
    with pytest.raises(ValueError):
        dispersion_measure("spectral", 1.0, a=0, k=1)
