"""Boundary traces of Neumann spectral clusters on the square ``(0, pi)^2``.

Eigenfunctions are ``u_{m,n}(x, y) = c_m c_n cos(mx) cos(ny)`` with
``c_0 = 1/sqrt(pi)`` and ``c_m = sqrt(2/pi)`` otherwise, so every ``u_{m,n}``
has unit ``L^2`` norm.  On each edge one of the two factors is the constant
``1`` or ``(-1)^m`` and the other is orthonormal in the edge variable, hence
edge integrals reduce to finite sums of squares.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from ._parallel import parallel_map

__all__ = [
    "WindowViolation",
    "ClusterSpec",
    "ClusterReport",
    "mode_constant",
    "annulus_indices",
    "boundary_norm_sq",
    "boundary_norm_sq_quadrature",
    "random_cluster",
    "single_mode",
    "build_optimality_cluster",
    "max_admissible_eps",
    "per_row_counts",
    "verify_cluster_bounds",
    "loglog_slope",
]

DEFAULT_DELTA = 0.3


class WindowViolation(ValueError):
    """Cluster indices do not fit the window ``s^2 <= m^2 + n^2 <= (s + delta)^2``."""


def mode_constant(m: int) -> float:
    return 1.0 / math.sqrt(math.pi) if m == 0 else math.sqrt(2.0 / math.pi)


@dataclass(frozen=True)
class ClusterSpec:
    coeffs: Mapping[tuple[int, int], complex]
    delta: float
    s: float

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.s < 0:
            raise ValueError("s must be nonnegative")
        if not self.coeffs:
            raise ValueError("cluster has no modes")
        lo, hi = self.s**2, (self.s + self.delta) ** 2
        for (m, n), a in self.coeffs.items():
            if m < 0 or n < 0:
                raise ValueError("mode indices must be nonnegative")
            if a != 0 and not (lo - 1e-9 <= m * m + n * n <= hi + 1e-9):
                raise WindowViolation(f"mode ({m}, {n}) outside [{self.s}, {self.s + self.delta}]")
        norm = sum(abs(a) ** 2 for a in self.coeffs.values())
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"cluster is not unit normalized (sum |a|^2 = {norm})")

    @property
    def frequency(self) -> float:
        """Mean frequency ``sqrt(sum |a|^2 (m^2 + n^2))``."""
        return math.sqrt(sum(abs(a) ** 2 * (m * m + n * n) for (m, n), a in self.coeffs.items()))


def _arrays(c: ClusterSpec):
    idx = np.array(list(c.coeffs.keys()), dtype=np.int64)
    a = np.array(list(c.coeffs.values()), dtype=complex)
    return idx[:, 0], idx[:, 1], a


def _edge_sum(free: np.ndarray, fixed: np.ndarray, a: np.ndarray, sign: bool) -> float:
    # sum over the free index of |sum over the fixed index of a c_fixed (+-1)^fixed|^2
    cf = np.where(fixed == 0, 1.0 / math.sqrt(math.pi), math.sqrt(2.0 / math.pi))
    if sign:
        cf = cf * np.where(fixed % 2 == 0, 1.0, -1.0)
    keys, inv = np.unique(free, return_inverse=True)
    b = np.zeros(keys.size, dtype=complex)
    np.add.at(b, inv, a * cf)
    return float(np.sum(np.abs(b) ** 2))


def boundary_norm_sq(c: ClusterSpec) -> float:
    """Exact ``int_{boundary} |p|^2 dS`` over the four edges."""
    m, n, a = _arrays(c)
    return (
        _edge_sum(n, m, a, False)  # x = 0
        + _edge_sum(n, m, a, True)  # x = pi
        + _edge_sum(m, n, a, False)  # y = 0
        + _edge_sum(m, n, a, True)  # y = pi
    )


def boundary_norm_sq_quadrature(c: ClusterSpec, points: int | None = None) -> float:
    """Gauss-Legendre quadrature of the boundary trace (independent check)."""
    m, n, a = _arrays(c)
    top = int(max(m.max(), n.max()))
    q = points or 2 * top + 40
    t, w = np.polynomial.legendre.leggauss(q)
    y = 0.5 * math.pi * (t + 1.0)
    w = 0.5 * math.pi * w
    cm = np.array([mode_constant(int(v)) for v in m])
    cn = np.array([mode_constant(int(v)) for v in n])
    total = 0.0
    for edge in range(4):
        if edge < 2:
            xs = np.full_like(y, 0.0 if edge == 0 else math.pi)
            ys = y
        else:
            xs = y
            ys = np.full_like(y, 0.0 if edge == 2 else math.pi)
        vals = (np.cos(np.outer(xs, m)) * np.cos(np.outer(ys, n))) @ (a * cm * cn)
        total += float(np.sum(w * np.abs(vals) ** 2))
    return total


def annulus_indices(s: float, delta: float) -> np.ndarray:
    """All ``(m, n)`` in ``N_0^2`` with ``s^2 <= m^2 + n^2 <= (s + delta)^2``."""
    hi = (s + delta) ** 2
    lo = s * s
    out = []
    for n in range(int(math.floor(s + delta)) + 1):
        rem_lo = lo - n * n
        rem_hi = hi - n * n
        m_lo = 0 if rem_lo <= 0 else int(math.ceil(math.sqrt(rem_lo) - 1e-12))
        m_hi = int(math.floor(math.sqrt(rem_hi) + 1e-12))
        for m in range(m_lo, m_hi + 1):
            if lo <= m * m + n * n <= hi:
                out.append((m, n))
    return np.array(out, dtype=np.int64).reshape(-1, 2)


def per_row_counts(s: float, delta: float) -> np.ndarray:
    """Number of ``m`` per row ``n`` in the annulus; bounded by ``C sqrt(s)``."""
    idx = annulus_indices(s, delta)
    return np.bincount(idx[:, 1])


def random_cluster(s: float, delta: float, rng: np.random.Generator) -> ClusterSpec:
    """Coefficients uniform on the unit complex sphere over the annulus."""
    idx = annulus_indices(s, delta)
    if idx.size == 0:
        raise WindowViolation(f"no modes with frequency in [{s}, {s + delta}]")
    z = rng.standard_normal(len(idx)) + 1j * rng.standard_normal(len(idx))
    z /= np.linalg.norm(z)
    return ClusterSpec({(int(m), int(n)): complex(v) for (m, n), v in zip(idx, z)}, delta, s)


def single_mode(m: int, n: int, delta: float = DEFAULT_DELTA) -> ClusterSpec:
    return ClusterSpec({(m, n): 1.0}, delta, math.hypot(m, n))


def build_optimality_cluster(n1: int, eps: float, delta: float = DEFAULT_DELTA) -> ClusterSpec:
    """``N = ceil(eps sqrt(n1))`` equal-weight modes ``(m, n1)``, ``m < N``.

    Raises
    ------
    WindowViolation
        If ``(N - 1)^2 + n1^2 > (n1 + delta)^2``.
    """
    if n1 < 1 or eps <= 0:
        raise ValueError("need n1 >= 1 and eps > 0")
    big_n = max(1, math.ceil(eps * math.sqrt(n1)))
    a = 1.0 / math.sqrt(big_n)
    return ClusterSpec({(m, n1): a for m in range(big_n)}, delta, float(n1))


def max_admissible_eps(n1_list: Iterable[int], delta: float = DEFAULT_DELTA) -> float:
    """Largest ``eps`` for which every optimality cluster fits its window."""
    best = math.inf
    for n1 in n1_list:
        n_max = math.floor(math.sqrt(2.0 * n1 * delta + delta * delta) + 1e-12) + 1
        best = min(best, n_max / math.sqrt(n1))
    return best


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


@dataclass
class ClusterReport:
    delta: float
    s_list: np.ndarray
    min_value: np.ndarray
    max_ratio: np.ndarray
    optimality_values: np.ndarray
    optimality_slope: float
    eigenfunction_values: np.ndarray
    eigenfunction_slope: float
    eps: float
    row_count_constant: float
    values: list[np.ndarray] = field(repr=False, default_factory=list)

    @property
    def lower_constant(self) -> float:
        return float(np.min(self.min_value))


def verify_cluster_bounds(
    delta: float = DEFAULT_DELTA,
    s_list=(100, 400, 1600, 6400),
    trials: int = 200,
    rng_seed: int = 7,
    eps: float | None = None,
) -> ClusterReport:
    """Random clusters per ``s`` plus the optimality and pure-mode sequences."""
    s_arr = np.asarray(s_list, dtype=float)
    seeds = np.random.SeedSequence(rng_seed).spawn(len(s_arr))

    def sweep(i: int) -> np.ndarray:
        rng = np.random.default_rng(seeds[i])
        return np.array([boundary_norm_sq(random_cluster(s_arr[i], delta, rng)) for _ in range(trials)])

    values = parallel_map(sweep, range(len(s_arr)))
    n1 = [int(round(s)) for s in s_arr]
    e = max_admissible_eps(n1, delta) if eps is None else eps
    opt = np.array([boundary_norm_sq(build_optimality_cluster(v, e, delta)) for v in n1])
    pure = np.array([boundary_norm_sq(single_mode(1, v, delta)) for v in n1])
    freq = [math.hypot(1, v) for v in n1]
    rows = max(per_row_counts(s, delta).max() / math.sqrt(s) for s in s_arr)
    return ClusterReport(
        delta=delta,
        s_list=s_arr,
        min_value=np.array([v.min() for v in values]),
        max_ratio=np.array([v.max() / math.sqrt(s) for v, s in zip(values, s_arr)]),
        optimality_values=opt,
        optimality_slope=loglog_slope(n1, opt),
        eigenfunction_values=pure,
        eigenfunction_slope=loglog_slope(freq, pure),
        eps=e,
        row_count_constant=float(rows),
        values=values,
    )
