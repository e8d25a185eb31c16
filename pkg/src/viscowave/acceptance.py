"""Acceptance suite: one function per criterion, each returning a :class:`CriterionResult`."""

from __future__ import annotations

import functools
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import cluster_square, rates, resolvent1d, simulate, spectrum1d, spectrum_disk
from .kernels import (
    ExponentialKernel,
    MeasureKernel,
    MeasureQuadrature,
    PrimeKernel,
    StandardKernel,
    discretize_measure,
)

__all__ = ["CriterionResult", "CRITERIA", "run_suite", "SINGULAR_PSI_POWER"]

# memory datum tau^-0.4 on (0, 1): finite sum w psi^2 / tau^2 for the
# tau^2 density near zero, yet close to the critical power 1/2
SINGULAR_PSI_POWER = 0.4
S_MAX_ORACLE = 50.0


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    summary: str
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number}: {self.name} | {self.summary} ({self.seconds:.1f}s)"


def _timed(number: int, name: str):
    def deco(fn: Callable[[], tuple[bool, str, dict]]):
        @functools.wraps(fn)
        def wrapper() -> CriterionResult:
            t0 = time.perf_counter()
            ok, summary, details = fn()
            return CriterionResult(number, name, bool(ok), summary, details, time.perf_counter() - t0)

        return wrapper

    return deco


# ---------------------------------------------------------------------------


@_timed(1, "interval eigenvalue asymptotics")
def criterion_1():
    worst_ratio = 0.0
    worst_res = 0.0
    counts_ok = True
    t0 = time.perf_counter()
    for beta in (0.3, 0.5, 0.7, 0.9):
        k = StandardKernel(beta, 1.0)
        eigs = spectrum1d.find_eigenvalues(k, 20, 300)
        for e in eigs:
            worst_res = max(worst_res, e.residual)
            counts_ok &= e.window_count == 1
            if e.n >= 100:
                worst_ratio = max(worst_ratio, abs(spectrum1d.asymptotic_ratio(k, e) - 2.0))
    elapsed = time.perf_counter() - t0
    ok = worst_ratio <= 0.1 and worst_res <= 1e-10 and counts_ok and elapsed < 30
    s = f"max|ratio-2|={worst_ratio:.2e} (<=0.1), max|G|={worst_res:.1e} (<=1e-10), counts=1: {counts_ok}, {elapsed:.1f}s (<30)"
    return ok, s, dict(max_ratio_dev=worst_ratio, max_residual=worst_res, runtime=elapsed)


@_timed(2, "disk spectrum")
def criterion_2():
    beta = 0.7
    k = StandardKernel(beta, 1.0)
    eigs = spectrum_disk.find_disk_eigenvalues(k, 0, (10, 80))
    dev = max(abs(spectrum_disk.xi_ratio(k, e) - 1.0) for e in eigs if e.n >= 30)
    prod = max(spectrum_disk.rate_product(e, beta) for e in eigs)
    bound = 1.25 * math.gamma(beta) * math.cos(beta * math.pi / 2) * 2
    ok = dev <= 0.1 and prod <= bound
    return ok, f"max|xi/khat-1|={dev:.3f} (<=0.1), max rate product={prod:.3f} (<= {bound:.3f})", dict(
        xi_dev=dev, rate_product=prod, bound=bound
    )


@_timed(3, "two-sided resolvent bound")
def criterion_3():
    out = {}
    ok = True
    parts = []
    for beta in (0.5, 0.8):
        rep = resolvent1d.two_sided_check(StandardKernel(beta, 1.0), 1e3)
        lo, hi = float(rep.refinement_ratios.min()), float(rep.refinement_ratios.max())
        good = rep.spread <= 20 and lo >= 0.99 and hi <= 1.01
        ok &= good
        out[beta] = dict(spread=rep.spread, ratio_min=lo, ratio_max=hi)
        parts.append(f"beta={beta}: maxB/minB={rep.spread:.2f}, refinement in [{lo:.5f}, {hi:.5f}]")
    return ok, "; ".join(parts), out


@_timed(4, "low-frequency bound")
def criterion_4():
    out = {}
    ok = True
    parts = []
    for k in (StandardKernel(0.7, 1.0), ExponentialKernel(1.0)):
        rep = resolvent1d.low_frequency_check(k)
        ok &= rep.spread <= 3
        out[repr(k)] = dict(products=rep.products.tolist(), spread=rep.spread, proxy_spread=rep.proxy_spread)
        parts.append(f"{k}: s^2||R|| spread={rep.spread:.2f} (<=3), s||R|| spread={rep.proxy_spread:.2f}")
    return ok, "; ".join(parts), out


@_timed(5, "square clusters")
def criterion_5():
    rep = cluster_square.verify_cluster_bounds(0.3, (100, 400, 1600, 6400), 200, 7)
    c = rep.lower_constant
    upper_ok = float(rep.max_ratio.max()) <= 2.0 * float(rep.max_ratio[0])
    ok = c > 0 and upper_ok and 0.45 <= rep.optimality_slope <= 0.55 and abs(rep.eigenfunction_slope) <= 0.05
    s = (
        f"min norm={c:.3f} (>0), max value/sqrt(s) per s={np.round(rep.max_ratio, 4).tolist()}, "
        f"optimality slope={rep.optimality_slope:.3f} in [0.45,0.55], eigenfunction slope={rep.eigenfunction_slope:.1e}"
    )
    return ok, s, dict(lower=c, max_ratio=rep.max_ratio.tolist(), slope=rep.optimality_slope, eps=rep.eps)


# shared simulation runs ------------------------------------------------------


@functools.lru_cache(maxsize=None)
def decay_run_standard(grid_n: int = 2048, nodes: int = 40) -> simulate.DecayResult:
    return simulate.run_decay(StandardKernel(0.8, 1.0), grid_n, nodes, 500.0, "rough", window=(50.0, 500.0))


def singular_psi0(tau: np.ndarray) -> np.ndarray:
    tau = np.asarray(tau, dtype=float)
    return np.where(tau < 1.0, tau ** (-SINGULAR_PSI_POWER), 0.0)


@functools.lru_cache(maxsize=None)
def decay_run_prime(grid_n: int = 2048, nodes: int = 60) -> simulate.DecayResult:
    return simulate.run_decay(
        PrimeKernel(2.0, 0.8), grid_n, nodes, 500.0, "gaussian", psi0=singular_psi0, window=(50.0, 500.0)
    )


@functools.lru_cache(maxsize=None)
def decay_run_exponential() -> simulate.DecayResult:
    q = discretize_measure(ExponentialKernel(1.0), 1)
    return simulate.run_decay(q, 512, 1, 200.0, "gaussian")


def _standing_drift(grid_n: int = 2048) -> float:
    q = MeasureQuadrature(np.array([]), np.array([]))
    h = 1.0 / grid_n
    nsteps = int(math.ceil(2.0 / (simulate.CFL_MAX * h)))
    dt = 2.0 / nsteps
    st = simulate.initial_state(simulate.standing_mode(1), grid_n, q, dt)
    e0 = simulate.energy(st, q).E
    end, samples, _ = simulate.evolve(st, q, nsteps, np.arange(0, nsteps + 1, max(1, nsteps // 64)))
    return float(np.max(np.abs(samples - e0)) / e0)


@_timed(6, "energy contraction")
def criterion_6():
    runs = {
        "standard(0.8,1) rough": decay_run_standard(),
        "prime(2,0.8) gaussian+psi": decay_run_prime(),
        "exponential(1) gaussian": decay_run_exponential(),
    }
    worst = max(r.max_rel_increase for r in runs.values())
    drift = _standing_drift()
    ok = worst <= 1e-8 and drift < 0.01
    return ok, f"max per-step relative increase={worst:.1e} (<=1e-8), standing-wave drift={drift:.1e} (<1%)", dict(
        worst=worst, drift=drift
    )


def _dominance(res: simulate.DecayResult, env: rates.EnergyEnvelope, log_free: bool) -> tuple[bool, float]:
    t, E = res.t, res.E
    lo, hi = res.window
    sel = (t >= lo) & (t <= hi)
    bound = env.evaluate(t[sel], log_free=log_free)
    ratio = E[sel] / bound
    first = t[sel] <= 2 * lo
    c = float(ratio[first].max())
    return bool(np.all(ratio <= c * (1 + 1e-12))), c


@_timed(7, "decay exponent, standard kernel")
def criterion_7():
    base = decay_run_standard()
    base_time = base.seconds
    fine = decay_run_standard(4096, 80)
    delta = abs(fine.exponent - base.exponent)
    ok = -3.0 <= base.exponent <= -2.0 and delta < 0.1 and base_time < 600
    s = (
        f"exponent={base.exponent:.3f}+-{base.halfwidth:.3f} in [-3,-2] (target -2.5), "
        f"doubled grid/nodes={fine.exponent:.3f} (delta {delta:.3f} < 0.1), base run {base_time:.1f}s"
    )
    return ok, s, dict(exponent=base.exponent, fine=fine.exponent, runtime=base_time)


@_timed(8, "decay exponent, singular kernel")
def criterion_8():
    res = decay_run_prime()
    env = rates.predict_energy_envelope(PrimeKernel(2.0, 0.8))
    dom, c = _dominance(res, env, log_free=False)
    dom_free, c_free = _dominance(res, env, log_free=True)
    wpsi = res.records[0].weighted_psi
    ok = -2.5 <= res.exponent <= -1.5 and dom and math.isfinite(wpsi)
    s = (
        f"exponent={res.exponent:.3f}+-{res.halfwidth:.4f} in [-2.5,-1.5], weighted_psi={wpsi:.3f}, "
        f"E<=C*envelope: {dom} (C={c:.3g}); log-free envelope: {dom_free}"
    )
    return ok, s, dict(exponent=res.exponent, C=c, dominance=dom, dominance_log_free=dom_free)


@_timed(9, "formula versus finite differences")
def criterion_9():
    # s is capped at 50 so that s h <= 0.1 on the coarsest grid
    rng = np.random.default_rng(2024)
    k = StandardKernel(0.7, 1.0)
    hs = np.array([512, 1024, 2048, 4096])
    orders = []
    for _ in range(5):
        s = float(rng.uniform(1.0, S_MAX_ORACLE))
        c = rng.normal(size=4)
        freq = rng.uniform(0.5, 6.0, 4)
        ph = rng.uniform(0, 2 * math.pi, 4)

        def f(x, c=c, freq=freq, ph=ph):
            return sum(c[j] * np.cos(freq[j] * math.pi * x + ph[j]) for j in range(4))

        d = []
        for n in hs:
            x = resolvent1d.grid(int(n))
            p = resolvent1d.solve_stationary(k, s, f(x))
            q = resolvent1d.solve_stationary_fd(k, s, f(x))
            d.append(np.linalg.norm(p - q) / np.linalg.norm(q))
        orders.append((s, -float(np.polyfit(np.log(hs), np.log(d), 1)[0])))
    worst = min(o for _, o in orders)
    return worst >= 1.8, "orders " + ", ".join(f"s={s:.1f}: {o:.2f}" for s, o in orders) + " (>=1.8)", dict(
        orders=orders
    )


def rate_kernels():
    return [
        StandardKernel(0.5, 1.0),
        StandardKernel(0.8, 1.0),
        PrimeKernel(2.0, 0.8),
        ExponentialKernel(1.0),
        MeasureKernel((1.0, 5.0), (0.5, 2.0)),
    ]


@_timed(10, "rate calculus round trip")
def criterion_10():
    worst = 0.0
    for k in rate_kernels():
        M = rates.m_from_kernel(k)
        for f in (M, rates.mlog(M)):
            lo, hi = f.range
            for t in np.geomspace(lo * (1 + 1e-6), hi / (1 + 1e-6), 100):
                x = rates.invert(f, t)
                worst = max(worst, abs(f(x) - t) / t)
    return worst <= 1e-8, f"max relative round-trip error={worst:.1e} (<=1e-8) over {len(rate_kernels())} kernels", dict(
        worst=worst
    )


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
}


def run_suite(numbers=None, echo: Callable[[str], None] | None = print) -> list[CriterionResult]:
    out = []
    for n in numbers or sorted(CRITERIA):
        res = CRITERIA[n]()
        if echo:
            echo(res.line())
        out.append(res)
    return out
