"""Fine-grid reference solvers and holistic coarse-grid solvers.

Two experiments are supported:

* the nonlinear Schrodinger equation ``i u_t = -u_xx/2 + alpha |u|^2 u``,
  fine second-order differences against the holistic coarse stencil on
  midpoint values;
* heterogeneous diffusion ``u_t = (kappa u_x)_x`` with
  ``kappa = 1/(1 + a cos k(x + phi))``, a conservative fine scheme against a
  constructed macroscale closure, plus Bloch-wave decay rates.

All grids are periodic.  Time stepping is classical RK4.
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.linalg import eigh

from .gridops import Stencil

__all__ = [
    "SimGrid", "RunConfig", "Trajectory", "NonFinite", "GridMismatch", "StencilWiderThanGrid",
    "nls_fine_rhs", "nls_holistic_rhs", "het_fine_rhs", "het_holistic_rhs", "het_kappa",
    "numeric_taps", "rk4_integrate", "compare_runs", "bloch_rate", "stencil_rate",
    "fit_decay_rate", "dispersion_measure", "predicted_het_rate", "write_trajectory_csv",
    "breather_initial", "run_breather", "coarse_samples", "read_trajectory_csv",
    "NLS_RK4_BOUND", "DIFFUSION_BOUND",
]

# RK4 is stable on the imaginary axis up to |z| = 2 sqrt(2); the fine NLS
# operator has spectral radius 2/h^2, so dt <= sqrt(2) h^2.
NLS_RK4_BOUND = math.sqrt(2)
# Explicit diffusion with max kappa: dt <= h^2 / (2 max kappa).
DIFFUSION_BOUND = 0.5


class NonFinite(FloatingPointError):
    """The integration produced NaN or inf; ``trajectory`` holds the last finite snapshots."""

    def __init__(self, msg: str, trajectory: "Trajectory"):
        super().__init__(msg)
        self.trajectory = trajectory


class GridMismatch(ValueError):
    """Trajectories cannot be compared point for point."""


class StencilWiderThanGrid(ValueError):
    """Stencil taps would wrap onto themselves on the periodic coarse grid."""


@dataclass(frozen=True)
class SimGrid:
    """Periodic grid of ``n`` points on ``[x_lo, x_hi)``."""

    x_lo: float
    x_hi: float
    n: int

    @property
    def h(self) -> float:
        return (self.x_hi - self.x_lo) / self.n

    @property
    def x(self) -> np.ndarray:
        return self.x_lo + self.h * np.arange(self.n)


@dataclass(frozen=True)
class RunConfig:
    solver: str
    dt: float
    T: float
    cadence: float
    params: dict = field(default_factory=dict)

    def check_stability(self, h: float, bound: float) -> None:
        """Raise if ``dt`` exceeds ``bound * h**2``."""
        if self.dt > bound * h * h:
            raise ValueError(f"dt={self.dt} exceeds stability bound {bound}*h^2={bound * h * h:.3g}")


# -- NLS --------------------------------------------------------------------

def nls_fine_rhs(u: np.ndarray, h: float, alpha: float) -> np.ndarray:
    """``u_t`` from ``i u_t = -(u_{i+1} - 2u_i + u_{i-1})/(2h^2) + alpha |u|^2 u``."""
    lap = (np.roll(u, -1) - 2 * u + np.roll(u, 1)) / (h * h)
    return 1j * (0.5 * lap - alpha * (np.abs(u) ** 2) * u)


def nls_holistic_rhs(U: np.ndarray, H: float, alpha: float, gamma: float = 1.0) -> np.ndarray:
    """Holistic coarse NLS scheme on element midpoint values, ``O(alpha^2, gamma^3)``."""
    Up1, Um1 = np.roll(U, -1), np.roll(U, 1)
    Up2, Um2 = np.roll(U, -2), np.roll(U, 2)
    a2 = np.abs(U) ** 2
    c = np.conj
    lin = -(gamma ** 2) / (8 * H * H) * (Up2 + Um2 - 2 * U)
    corr = (2 * a2 * (Up2 + Um2 - 4 * U)
            - 4 * np.abs(Up2) ** 2 * (Up2 - 2 * U) - 4 * np.abs(Um2) ** 2 * (Um2 - 2 * U)
            - 4 * c(U) * (Up1 ** 2 + Um1 ** 2 - Up1 * Um1)
            - 4 * U * (c(Up1) * Um1 + c(Um1) * Up1)
            + c(Up2) * (U ** 2 - 2 * Up1 ** 2) + c(Um2) * (U ** 2 - 2 * Um1 ** 2))
    rhs = alpha * a2 * U + lin + alpha * gamma ** 2 / 96 * corr
    return -1j * rhs


def breather_initial(x: np.ndarray) -> np.ndarray:
    """``1 - i sech x``."""
    return 1 - 1j / np.cosh(x)


# -- heterogeneous diffusion --------------------------------------------------

def het_kappa(x: np.ndarray, a: float, k: float, phi: float = 0.0) -> np.ndarray:
    return 1.0 / (1.0 + a * np.cos(k * (x + phi)))


def het_fine_rhs(u: np.ndarray, grid: SimGrid, a: float, k: float, phi: float = 0.0) -> np.ndarray:
    """Conservative flux differences with ``kappa`` sampled at half nodes."""
    h = grid.h
    kp = het_kappa(grid.x + 0.5 * h, a, k, phi)   # kappa_{i+1/2}
    flux = kp * (np.roll(u, -1) - u)
    return (flux - np.roll(flux, 1)) / (h * h)


def numeric_taps(stencil: Stencil, values: Mapping[str, float]) -> dict[int, float]:
    """Integer-shift taps evaluated at numeric parameter values."""
    out = {}
    for s, c in stencil.taps.items():
        if s.denominator != 1:
            raise ValueError("half-integer shift cannot act on a grid field")
        v = c.evaluate(values)
        if v:
            out[int(s)] = float(v)
    return out


def het_holistic_rhs(U: np.ndarray, taps, values: Mapping[str, float] | None = None) -> np.ndarray:
    """Apply a macroscale closure to a periodic coarse field.

    ``taps`` is a shift -> float map, a :class:`Stencil`, or a constructed
    evolution (folded, then evaluated at ``values``; ``gamma`` defaults to 1).
    """
    if hasattr(taps, "folded"):
        taps = taps.folded()
    if isinstance(taps, Stencil):
        values = {"gamma": 1, **(values or {})}
        taps = numeric_taps(taps, values or {})
    if taps:
        width = max(taps) - min(taps)
        if width >= U.size:
            raise StencilWiderThanGrid(f"stencil width {width} >= grid size {U.size}")
    out = np.zeros_like(U)
    for s, c in taps.items():
        out = out + c * np.roll(U, -s)
    return out


# -- time stepping ------------------------------------------------------------

@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray      # shape (snapshots, n)
    x: np.ndarray | None = None


def rk4_integrate(rhs: Callable[[np.ndarray], np.ndarray], state: np.ndarray, dt: float,
                  T: float, cadence: float | None = None, x: np.ndarray | None = None) -> Trajectory:
    """Classical RK4 from ``t = 0`` to ``T``; snapshots every ``cadence`` (default only the ends).

    ``T`` and ``cadence`` are rounded to whole numbers of steps.
    """
    nsteps = int(round(T / dt))
    every = nsteps if not cadence else max(1, int(round(cadence / dt)))
    u = np.array(state, copy=True)
    times, snaps = [0.0], [u.copy()]
    for step in range(1, nsteps + 1):
        k1 = rhs(u)
        k2 = rhs(u + 0.5 * dt * k1)
        k3 = rhs(u + 0.5 * dt * k2)
        k4 = rhs(u + dt * k3)
        u = u + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        if step % every == 0 or step == nsteps:
            if not np.all(np.isfinite(u)):
                traj = Trajectory(np.array(times), np.array(snaps), x)
                raise NonFinite(f"non-finite state at t={step * dt:.6g}", traj)
            if times[-1] != step * dt:
                times.append(step * dt)
                snaps.append(u.copy())
    return Trajectory(np.array(times), np.array(snaps), x)


def compare_runs(fine: Trajectory, coarse: Trajectory, stride: int | None = None,
                 offset: int = 0) -> dict:
    """Relative L2 and max differences of ``|u|`` at coarse points, per snapshot.

    Coarse point ``j`` sits on fine index ``offset + j*stride``; by default the
    stride is inferred from the grid sizes.
    """
    if len(fine.times) != len(coarse.times) or not np.allclose(fine.times, coarse.times,
                                                                rtol=0, atol=1e-12):
        raise GridMismatch("snapshot times differ")
    nf, nc = fine.states.shape[1], coarse.states.shape[1]
    if stride is None:
        if nf % nc:
            raise GridMismatch(f"coarse grid ({nc}) is not a subset of the fine grid ({nf})")
        stride = nf // nc
    idx = offset + stride * np.arange(nc)
    if idx[-1] >= nf:
        raise GridMismatch("coarse points fall outside the fine grid")
    if fine.x is not None and coarse.x is not None and not np.allclose(fine.x[idx], coarse.x):
        raise GridMismatch("coarse points do not coincide with fine points")
    mf = np.abs(fine.states[:, idx])
    mc = np.abs(coarse.states)
    diff = mf - mc
    l2 = np.linalg.norm(diff, axis=1) / np.maximum(np.linalg.norm(mf, axis=1), 1e-300)
    mx = np.max(np.abs(diff), axis=1)
    return {"times": fine.times.tolist(), "rel_l2": l2.tolist(), "max_abs": mx.tolist(),
            "max_rel_l2": float(np.max(l2)), "max_max_abs": float(np.max(mx))}


def write_trajectory_csv(path: str, traj: Trajectory) -> list[str]:
    """CSV per component (``_re``/``_im`` for complex fields), written atomically."""
    comps = ([("_re", np.real), ("_im", np.imag)] if np.iscomplexobj(traj.states)
             else [("", lambda z: z)])
    root, ext = os.path.splitext(path)
    ext = ext or ".csv"
    written = []
    n = traj.states.shape[1]
    for suffix, part in comps:
        target = root + suffix + ext
        d = os.path.dirname(os.path.abspath(target))
        fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
        with os.fdopen(fd, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"x_{i}" for i in range(n)])
            for t, row in zip(traj.times, part(traj.states)):
                w.writerow([repr(float(t))] + [repr(float(v)) for v in row])
        os.replace(tmp, target)
        written.append(target)
    return written


def read_trajectory_csv(path: str) -> Trajectory:
    """Inverse of :func:`write_trajectory_csv`; ``*_re.csv`` pairs with ``*_im.csv``."""
    def load(p):
        data = np.loadtxt(p, delimiter=",", skiprows=1, ndmin=2)
        return data[:, 0], data[:, 1:]

    root, ext = os.path.splitext(path)
    if root.endswith("_re") or root.endswith("_im"):
        base = root[:-3]
        t, re = load(base + "_re" + ext)
        _, im = load(base + "_im" + ext)
        return Trajectory(t, re + 1j * im)
    t, vals = load(path)
    return Trajectory(t, vals)


# -- dispersion -----------------------------------------------------------------

def predicted_het_rate(a: float, k: float, K: float) -> float:
    """``-K^2 + a^2 K^4/(2k^2) + 2 a^2 K^6/k^4``."""
    return -K ** 2 + a * a * K ** 4 / (2 * k * k) + 2 * a * a * K ** 6 / k ** 4


def bloch_rate(a: float, k: float, K: float, M: int = 256, phi: float = 0.0) -> float:
    """Decay rate of the Bloch mode ``exp(iKx) v(x)``, ``v`` of period ``2 pi/k``.

    Uses the conservative fine scheme on one period with ``M`` nodes and the
    quasi-periodic wrap; returns the eigenvalue closest to zero.
    """
    d = 2 * math.pi / k
    h = d / M
    x = h * np.arange(M)
    kp = het_kappa(x + 0.5 * h, a, k, phi)
    km = np.roll(kp, 1)
    ph = np.exp(1j * K * h)
    A = np.zeros((M, M), dtype=complex)
    for i in range(M):
        A[i, i] = -(kp[i] + km[i])
        A[i, (i + 1) % M] += kp[i] * ph
        A[i, (i - 1) % M] += km[i] * np.conj(ph)
    A /= h * h
    w = eigh(A, eigvals_only=True)
    return float(w[np.argmin(np.abs(w))])


def stencil_rate(taps: Mapping[int, float], K: float, H: float) -> complex:
    """Symbol ``sum_s c_s exp(i K s H)`` of a macroscale closure."""
    val = sum(c * complex(math.cos(K * s * H), math.sin(K * s * H)) for s, c in taps.items())
    return val if abs(val.imag) > 1e-14 * max(1.0, abs(val.real)) else val.real


def fit_decay_rate(traj: Trajectory, x: np.ndarray, K: float) -> float:
    """Least-squares exponential rate of the ``exp(iKx)`` Fourier amplitude."""
    amp = np.abs(traj.states @ np.exp(-1j * K * x)) / len(x)
    slope, _ = np.polyfit(traj.times, np.log(amp), 1)
    return float(slope)


def dispersion_measure(solver: str, K: float, *, a: float, k: float, H: float | None = None,
                       taps: Mapping[int, float] | None = None, M: int = 256,
                       fine_points: int | None = None, T: float = 0.01) -> float:
    """Decay rate of mode ``K`` for ``"fine_bloch"``, ``"fine_run"`` or ``"holistic"``."""
    if solver == "fine_bloch":
        return bloch_rate(a, k, K, M)
    if solver == "holistic":
        if taps is None or H is None:
            raise ValueError("holistic rate needs numeric taps and H")
        return float(np.real(stencil_rate(taps, K, H)))
    if solver == "fine_run":
        n = fine_points or int(round(M * k))
        grid = SimGrid(0.0, 2 * math.pi, n)
        x = grid.x
        u0 = np.cos(K * x)
        dt = 0.2 * grid.h ** 2 * (1 - abs(a))
        traj = rk4_integrate(lambda u: het_fine_rhs(u, grid, a, k), u0, dt, T, T / 10, x)
        return fit_decay_rate(traj, x, K)
    raise ValueError(f"unknown solver {solver!r}")


# -- breather experiment --------------------------------------------------------

def run_breather(n_fine: int = 1024, n_coarse: int = 128, T: float = 1.0, alpha: float = -1.0,
                 dt_fine: float = 2.5e-5, dt_coarse: float = 2e-4, cadence: float = 0.1,
                 domain: tuple[float, float] = (-math.pi, math.pi)) -> tuple[Trajectory, Trajectory, dict]:
    """Fine versus holistic NLS from ``1 - i sech x``; returns both trajectories and metrics.

    When ``n_fine`` is not a multiple of ``n_coarse`` the coarse points are
    placed on the nearest fine nodes of a uniform ``n_coarse`` grid, i.e. the
    comparison uses the fine solution at those nodes.
    """
    fine = SimGrid(domain[0], domain[1], n_fine)
    coarse = SimGrid(domain[0], domain[1], n_coarse)
    tf = rk4_integrate(lambda u: nls_fine_rhs(u, fine.h, alpha), breather_initial(fine.x),
                       dt_fine, T, cadence, fine.x)
    tc = rk4_integrate(lambda U: nls_holistic_rhs(U, coarse.h, alpha), breather_initial(coarse.x),
                       dt_coarse, T, cadence, coarse.x)
    return tf, tc, compare_runs(coarse_samples(tf, coarse), tc, stride=1)


def coarse_samples(fine: Trajectory, coarse: SimGrid) -> Trajectory:
    """Fine trajectory restricted to the fine nodes nearest each coarse point.

    Exact coincidence when the fine size is a multiple of the coarse size;
    otherwise (e.g. 3300 against 151) the offset is at most ``h/2``.
    """
    n = fine.states.shape[1]
    x_lo = coarse.x_lo
    h = coarse.h * coarse.n / n
    idx = np.rint((coarse.x - x_lo) / h).astype(int) % n
    return Trajectory(fine.times, fine.states[:, idx], coarse.x)
