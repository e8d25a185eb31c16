"""Time-domain evolution of the 1D wave system with memory boundary states.

Unknowns on ``(0, 1)`` with ``N`` cells of width ``h``: pressure ``p`` at
cell centres, velocity ``v`` at faces (staggered half a step in time) and
memory variables ``psi_L``, ``psi_R`` per quadrature node ``tau_j``::

    p_t = -v_x,   v_t = -p_x,   psi_t = -tau psi + p(boundary),
    v(0) = -sum_j w_j psi_L,j,   v(1) = sum_j w_j psi_R,j.

``psi`` is advanced by exact exponential integration against the
time-averaged boundary pressure, which makes the boundary cell update a
scalar linear solve.  The discrete energy::

    E = h sum p^2 + sum_j w'_j (psi_L,j^2 + psi_R,j^2) + h sum v^(n-1/2) v^(n+1/2)

with ``w'_j = w_j (tau_j dt / 2) coth(tau_j dt / 2)`` is exactly
nonincreasing for ``dt <= h``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numba
import numpy as np
from scipy import stats

from .kernels import Kernel, MeasureQuadrature, discretize_measure

__all__ = [
    "CFLViolation",
    "SimState",
    "EnergyRecord",
    "DecayResult",
    "memory_coefficients",
    "initial_state",
    "step",
    "energy",
    "evolve",
    "run_decay",
    "fit_exponent",
    "gaussian_pulse",
    "standing_mode",
    "rough_profile",
    "PROFILES",
]

CFL_MAX = 0.9


class CFLViolation(ValueError):
    pass


@dataclass(frozen=True)
class SimState:
    """State at time ``t``; ``v`` holds face velocities at ``t - dt/2``."""

    p: np.ndarray
    v: np.ndarray
    psi_L: np.ndarray
    psi_R: np.ndarray
    t: float
    dt: float

    def __post_init__(self):
        if self.p.ndim != 1 or self.p.size < 2:
            raise ValueError("p needs at least 2 cells")
        if self.v.shape != (self.p.size + 1,):
            raise ValueError("v must live on the p.size + 1 faces")
        if self.psi_L.shape != self.psi_R.shape:
            raise ValueError("psi_L and psi_R must have equal length")
        for arr in (self.p, self.v, self.psi_L, self.psi_R):
            if not np.all(np.isfinite(arr)):
                raise ValueError("state contains non-finite values")

    @property
    def grid_n(self) -> int:
        return self.p.size

    @property
    def h(self) -> float:
        return 1.0 / self.p.size


@dataclass(frozen=True)
class EnergyRecord:
    t: float
    E: float
    E1_hom: float
    weighted_psi: float


@dataclass(frozen=True)
class MemoryCoefficients:
    tau: np.ndarray
    w: np.ndarray
    a: np.ndarray  # exp(-tau dt)
    b: np.ndarray  # (1 - a) / tau
    w_mod: np.ndarray  # energy weights


def memory_coefficients(quad: MeasureQuadrature, dt: float) -> MemoryCoefficients:
    tau = np.asarray(quad.nodes, dtype=float)
    w = np.asarray(quad.weights, dtype=float)
    x = tau * dt
    a = np.exp(-x)
    b = -np.expm1(-x) / tau if tau.size else tau.copy()
    half = 0.5 * x
    w_mod = w * np.where(half > 1e-8, half / np.tanh(np.maximum(half, 1e-300)), 1.0)
    return MemoryCoefficients(tau, w, a, b, w_mod)


# ---------------------------------------------------------------------------
# compiled kernels


@numba.njit(cache=True)
def _energy_parts(p, v_old, psi_L, psi_R, w_mod, dt, h):
    n = p.size
    r = dt / h
    e = 0.0
    for i in range(n):
        e += h * p[i] * p[i]
    for j in range(1, n):
        v_new = v_old[j] - r * (p[j] - p[j - 1])
        e += h * v_old[j] * v_new
    for m in range(w_mod.size):
        e += w_mod[m] * (psi_L[m] * psi_L[m] + psi_R[m] * psi_R[m])
    return e


@numba.njit(cache=True)
def _advance(p, v, psi_L, psi_R, w, a, b, w_mod, dt, h, nsteps, sample_steps, track):
    """Advance ``nsteps`` in place.

    Energies are stored at step indices listed in ``sample_steps`` (sorted);
    with ``track`` set, the largest per-step relative energy increase is
    returned as well.
    """
    n = p.size
    r = dt / h
    nm = w.size
    S = 0.0
    for m in range(nm):
        S += w[m] * b[m]
    S *= 0.5 * r
    samples = np.empty(sample_steps.size)
    k = 0
    worst = -np.inf
    e_prev = _energy_parts(p, v, psi_L, psi_R, w_mod, dt, h) if track else 0.0
    for it in range(nsteps + 1):
        while k < sample_steps.size and sample_steps[k] == it:
            samples[k] = _energy_parts(p, v, psi_L, psi_R, w_mod, dt, h)
            k += 1
        if it == nsteps:
            break
        # interior faces
        for j in range(1, n):
            v[j] = v[j] - r * (p[j] - p[j - 1])
        p_left = p[0]
        p_right = p[n - 1]
        for i in range(1, n - 1):
            p[i] = p[i] - r * (v[i + 1] - v[i])
        # boundary cells: scalar implicit solve
        AL = 0.0
        AR = 0.0
        for m in range(nm):
            AL += 0.5 * w[m] * (1.0 + a[m]) * psi_L[m]
            AR += 0.5 * w[m] * (1.0 + a[m]) * psi_R[m]
        new_left = ((p_left - r * v[1]) - r * AL - 0.5 * S * p_left) / (1.0 + 0.5 * S)
        new_right = ((p_right + r * v[n - 1]) - r * AR - 0.5 * S * p_right) / (1.0 + 0.5 * S)
        bar_left = 0.5 * (p_left + new_left)
        bar_right = 0.5 * (p_right + new_right)
        flux_L = 0.0
        flux_R = 0.0
        for m in range(nm):
            mid_L = 0.5 * (1.0 + a[m]) * psi_L[m] + 0.5 * b[m] * bar_left
            mid_R = 0.5 * (1.0 + a[m]) * psi_R[m] + 0.5 * b[m] * bar_right
            flux_L += w[m] * mid_L
            flux_R += w[m] * mid_R
            psi_L[m] = a[m] * psi_L[m] + b[m] * bar_left
            psi_R[m] = a[m] * psi_R[m] + b[m] * bar_right
        v[0] = -flux_L
        v[n] = flux_R
        p[0] = new_left
        p[n - 1] = new_right
        if track:
            e_now = _energy_parts(p, v, psi_L, psi_R, w_mod, dt, h)
            if e_prev > 0.0:
                rel = (e_now - e_prev) / e_prev
                if rel > worst:
                    worst = rel
            e_prev = e_now
    return samples, worst


# ---------------------------------------------------------------------------
# public API


def _check_cfl(dt: float, h: float) -> None:
    if not (0.0 < dt <= CFL_MAX * h * (1.0 + 1e-12)):
        raise CFLViolation(f"dt = {dt!r} exceeds {CFL_MAX} h = {CFL_MAX * h!r}")


def cell_centres(grid_n: int) -> np.ndarray:
    return (np.arange(grid_n) + 0.5) / grid_n


def faces(grid_n: int) -> np.ndarray:
    return np.arange(grid_n + 1) / grid_n


def initial_state(
    p0: Callable[[np.ndarray], np.ndarray],
    grid_n: int,
    quad: MeasureQuadrature,
    dt: float,
    v0: Callable[[np.ndarray], np.ndarray] | None = None,
    psi0: Callable[[np.ndarray], np.ndarray] | None = None,
) -> SimState:
    """Sample initial data; ``v`` is shifted back half a step to ``-dt/2``.

    Without ``v0`` the velocity is the linear profile ``phi (2x - 1)``,
    ``phi = sum_j w_j psi0(tau_j)``, which satisfies the flux condition at
    both ends so that the first-order energy stays finite.
    """
    h = 1.0 / grid_n
    _check_cfl(dt, h)
    p = np.asarray(p0(cell_centres(grid_n)), dtype=float).copy()
    xf = faces(grid_n)
    tau = np.asarray(quad.nodes, dtype=float)
    psi = np.zeros(tau.size) if psi0 is None else np.asarray(psi0(tau), dtype=float)
    w = np.asarray(quad.weights, dtype=float)
    if v0 is None:
        v = float(w @ psi) * (2.0 * xf - 1.0)
    else:
        v = np.asarray(v0(xf), dtype=float).copy()
    # v(-dt/2) = v(0) + (dt/2) p_x
    v[1:-1] += 0.5 * dt * np.diff(p) / h
    v[0] = -float(w @ psi)
    v[-1] = float(w @ psi)
    return SimState(p, v, psi.copy(), psi.copy(), 0.0, dt)


def step(state: SimState, k: MeasureQuadrature, dt: float | None = None) -> SimState:
    """One time step (returns a new state).

    Raises
    ------
    CFLViolation
        If ``dt > 0.9 h``.
    """
    dt = state.dt if dt is None else dt
    if dt != state.dt:
        raise ValueError("dt must match the staggering of the state")
    _check_cfl(dt, state.h)
    c = memory_coefficients(k, dt)
    p, v = state.p.copy(), state.v.copy()
    pl, pr = state.psi_L.copy(), state.psi_R.copy()
    _advance(p, v, pl, pr, c.w, c.a, c.b, c.w_mod, dt, state.h, 1, np.empty(0, np.int64), False)
    return SimState(p, v, pl, pr, state.t + dt, dt)


def energy(state: SimState, k: MeasureQuadrature) -> EnergyRecord:
    """Discrete energy, first-order homogeneous energy and ``sum w psi^2 / tau^2``."""
    c = memory_coefficients(k, state.dt)
    h = state.h
    e = float(_energy_parts(state.p, state.v, state.psi_L, state.psi_R, c.w_mod, state.dt, h))
    p, v = state.p, state.v
    grad = np.diff(p) / h
    div = np.diff(v) / h
    # boundary values of p by second-order extrapolation to the faces
    pb_L = 1.5 * p[0] - 0.5 * p[1]
    pb_R = 1.5 * p[-1] - 0.5 * p[-2]
    e1 = h * float(grad @ grad) + h * float(div @ div)
    if c.tau.size:
        e1 += float(c.w @ ((c.tau * state.psi_L - pb_L) ** 2 + (c.tau * state.psi_R - pb_R) ** 2))
        wpsi = float((c.w / c.tau**2) @ (state.psi_L**2 + state.psi_R**2))
    else:
        wpsi = 0.0
    return EnergyRecord(t=state.t, E=e, E1_hom=e1, weighted_psi=wpsi)


def evolve(state: SimState, k: MeasureQuadrature, nsteps: int, sample_steps=None, track: bool = False):
    """Advance ``nsteps``; returns ``(new_state, sampled_energies, worst_relative_increase)``."""
    _check_cfl(state.dt, state.h)
    c = memory_coefficients(k, state.dt)
    p, v = state.p.copy(), state.v.copy()
    pl, pr = state.psi_L.copy(), state.psi_R.copy()
    ss = np.asarray([] if sample_steps is None else sample_steps, dtype=np.int64)
    if ss.size and (np.any(np.diff(ss) < 0) or ss[0] < 0 or ss[-1] > nsteps):
        raise ValueError("sample_steps must be sorted within [0, nsteps]")
    samples, worst = _advance(p, v, pl, pr, c.w, c.a, c.b, c.w_mod, state.dt, state.h, nsteps, ss, track)
    new = SimState(p, v, pl, pr, state.t + nsteps * state.dt, state.dt)
    return new, samples, float(worst)


# ---------------------------------------------------------------------------
# initial profiles


def gaussian_pulse(centre: float = 0.5, width: float = 0.05):
    return lambda x: np.exp(-(((x - centre) / width) ** 2))


def standing_mode(m: int = 1):
    return lambda x: np.cos(m * math.pi * x)


def rough_profile(modes: int = 512, power: float = 1.5):
    """``sum_{n=1}^{modes} n^-power cos(n pi x)``: finite but large first-order energy."""
    n = np.arange(1, modes + 1, dtype=float)
    amp = n**-power

    def f(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for lo in range(0, modes, 64):
            sl = slice(lo, lo + 64)
            out += np.cos(np.outer(x, n[sl] * math.pi)) @ amp[sl]
        return out

    return f


PROFILES = {
    "gaussian": gaussian_pulse,
    "standing": standing_mode,
    "rough": rough_profile,
}


def fit_exponent(t: np.ndarray, E: np.ndarray, window: tuple[float, float], level: float = 0.95):
    """Least-squares slope of ``log E`` on ``log t`` with a confidence half-width."""
    t = np.asarray(t, float)
    E = np.asarray(E, float)
    sel = (t >= window[0]) & (t <= window[1]) & (E > 0)
    if sel.sum() < 3:
        raise ValueError("fit window holds fewer than 3 samples")
    res = stats.linregress(np.log(t[sel]), np.log(E[sel]))
    q = stats.t.ppf(0.5 + level / 2, sel.sum() - 2)
    return float(res.slope), float(q * res.stderr)


@dataclass
class DecayResult:
    records: list[EnergyRecord]
    exponent: float
    halfwidth: float
    window: tuple[float, float]
    max_rel_increase: float
    quad: MeasureQuadrature = field(repr=False)
    grid_n: int = 0
    dt: float = 0.0
    seconds: float = 0.0

    @property
    def t(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    @property
    def E(self) -> np.ndarray:
        return np.array([r.E for r in self.records])


def run_decay(
    k: Kernel | MeasureQuadrature,
    grid_n: int = 2048,
    quad_nodes: int = 40,
    T: float = 500.0,
    initial: str | Callable = "gaussian",
    *,
    tau_max: float = 1e6,
    cfl: float = CFL_MAX,
    psi0: Callable[[np.ndarray], np.ndarray] | None = None,
    v0: Callable[[np.ndarray], np.ndarray] | None = None,
    n_samples: int = 400,
    window: tuple[float, float] | None = None,
    track: bool = True,
    mode: int = 1,
) -> DecayResult:
    """Energy decay curve on log-spaced times and its power-law fit.

    ``initial`` is ``"gaussian"``, ``"standing"`` (uses ``mode``), ``"rough"``
    or a callable ``p0(x)``.  The fit window defaults to the final decade
    ``[T/10, T]`` with ``t >= 10``.
    """
    started = time.perf_counter()
    quad = k if isinstance(k, MeasureQuadrature) else discretize_measure(k, quad_nodes, tau_max)
    h = 1.0 / grid_n
    nsteps = int(math.ceil(T / (cfl * h)))
    dt = T / nsteps
    if callable(initial):
        p0 = initial
    elif initial == "standing":
        p0 = standing_mode(mode)
    elif initial in PROFILES:
        p0 = PROFILES[initial]()
    else:
        raise ValueError(f"unknown initial profile {initial!r}")
    state = initial_state(p0, grid_n, quad, dt, v0=v0, psi0=psi0)
    times = np.unique(np.concatenate([[0.0], np.geomspace(min(1.0, T), T, n_samples)]))
    steps = np.unique(np.round(times / dt).astype(np.int64))
    steps = steps[steps <= nsteps]
    e0 = energy(state, quad)
    final, samples, worst = evolve(state, quad, nsteps, steps, track=track)
    e_end = energy(final, quad)
    records = [replace(e0, E=float(samples[0]))] if steps[0] == 0 else [e0]
    records += [EnergyRecord(float(s * dt), float(e), math.nan, math.nan) for s, e in zip(steps, samples) if s > 0]
    records[-1] = replace(records[-1], E1_hom=e_end.E1_hom, weighted_psi=e_end.weighted_psi)
    win = window if window is not None else (max(10.0, T / 10.0), T)
    tt = np.array([r.t for r in records])
    ee = np.array([r.E for r in records])
    slope, hw = fit_exponent(tt, ee, win)
    return DecayResult(records, slope, hw, win, worst, quad, grid_n, dt, time.perf_counter() - started)
