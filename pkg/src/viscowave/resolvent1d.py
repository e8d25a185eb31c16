"""Stationary problem and resolvent norms on the unit interval.

For real ``s`` the stationary problem reads::

    -s^2 p - p'' = f  on (0, 1),
    -p'(0) + i s khat(is) p(0) = 0,   p'(1) + i s khat(is) p(1) = 0.

Its solution is ``p = a p0 + pf`` with the particular part
``pf(x) = -(1/s) int_0^x sin(s(x - y)) f(y) dy`` (zero Cauchy data at 0),
the homogeneous part ``p0 = cos(sx) + i khat sin(sx)`` and the scalar ``a``
fixed by the condition at ``x = 1``.  The denominator of ``a`` is expanded
into sines and cosines so no tangent is ever formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize
from scipy.sparse.linalg import LinearOperator, svds

from ._parallel import parallel_map
from .kernels import Kernel

__all__ = [
    "DegenerateDenominator",
    "ResolventProbe",
    "TwoSidedReport",
    "LowFrequencyReport",
    "grid",
    "auto_grid_n",
    "solve_stationary",
    "solve_stationary_fd",
    "green_matrix",
    "resolvent_norm",
    "resonant_frequency",
    "two_sided_check",
    "low_frequency_check",
]

S_MIN = 1e-3


class DegenerateDenominator(ArithmeticError):
    """``s`` is numerically an eigenfrequency; the stationary problem is singular."""


@dataclass(frozen=True)
class ResolventProbe:
    s: float
    norm_R: float
    grid_n: int
    refinement_ratio: float = math.nan

    @property
    def proxy_full(self) -> float:
        return abs(self.s) * self.norm_R

    @property
    def refined(self) -> bool:
        return 0.9 <= self.refinement_ratio <= 1.1


def grid(grid_n: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, grid_n + 1)


def auto_grid_n(s: float, minimum: int = 512) -> int:
    """Grid with ``|s| h <= 1/8``."""
    return max(minimum, int(math.ceil(8.0 * abs(s))))


def _trap_weights(grid_n: int) -> np.ndarray:
    w = np.full(grid_n + 1, 1.0 / grid_n)
    w[0] = w[-1] = 0.5 / grid_n
    return w


def _cumtrap(g: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(g)
    out[1:] = np.cumsum(0.5 * h * (g[1:] + g[:-1]))
    return out


def _cumtrap_adjoint(g: np.ndarray, h: float) -> np.ndarray:
    # row i of the cumulative trapezoid uses h/2 at j = 0 and j = i, h in between
    tail = np.zeros_like(g)
    tail[:-1] = np.cumsum(g[::-1])[::-1][1:]  # tail[j] = sum_{i > j} g[i]
    out = h * tail + 0.5 * h * g
    out[0] = 0.5 * h * tail[0]
    return out


class _Stationary:
    """Linear map ``f -> p`` on a uniform grid, with its adjoint."""

    def __init__(self, k: Kernel, s: float, grid_n: int):
        if abs(s) < S_MIN:
            raise ValueError(f"|s| must be at least {S_MIN:g}")
        self.s = float(s)
        self.n = int(grid_n)
        self.h = 1.0 / self.n
        self.x = grid(self.n)
        self.kh = complex(k.laplace(1j * self.s))
        s, kh = self.s, self.kh
        self.sin = np.sin(s * self.x)
        self.cos = np.cos(s * self.x)
        self.p0 = self.cos + 1j * kh * self.sin
        den = s * ((1.0 + kh * kh) * math.sin(s) - 2j * kh * math.cos(s))
        if abs(den) <= 1e-13 * abs(s) * (1.0 + abs(kh) ** 2):
            raise DegenerateDenominator(f"s = {s!r} is numerically an eigenfrequency")
        self.den = den
        # functional f -> p_f'(1) + i s khat p_f(1), using full trapezoid weights
        w = _trap_weights(self.n)
        sn, cs = math.sin(s), math.cos(s)
        pf1 = -(1.0 / s) * (sn * self.cos - cs * self.sin) * w
        dpf1 = -(cs * self.cos + sn * self.sin) * w
        self.ell = (dpf1 + 1j * s * kh * pf1) / den

    def particular(self, f: np.ndarray):
        c = _cumtrap(self.cos * f, self.h)
        sm = _cumtrap(self.sin * f, self.h)
        pf = -(1.0 / self.s) * (self.sin * c - self.cos * sm)
        dpf = -(self.cos * c + self.sin * sm)
        return pf, dpf

    def apply(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f, dtype=complex)
        pf, _ = self.particular(f)
        return (self.ell @ f) * self.p0 + pf

    def adjoint(self, g: np.ndarray) -> np.ndarray:
        g = np.asarray(g, dtype=complex)
        inv_s = 1.0 / self.s
        a = _cumtrap_adjoint(-inv_s * self.sin * g, self.h)
        b = _cumtrap_adjoint(inv_s * self.cos * g, self.h)
        return np.conj(self.ell) * (np.conj(self.p0) @ g) + self.cos * a + self.sin * b


def solve_stationary(k: Kernel, s: float, f: np.ndarray) -> np.ndarray:
    """Solution on the grid carrying ``f`` (``len(f) - 1`` uniform cells).

    Raises
    ------
    DegenerateDenominator
        If ``s`` is numerically a resonance (only possible without damping).
    """
    f = np.asarray(f)
    if f.ndim != 1 or f.size < 3:
        raise ValueError("f must be a 1D grid function with at least 3 nodes")
    return _Stationary(k, s, f.size - 1).apply(f)


def solve_stationary_fd(k: Kernel, s: float, f: np.ndarray, *, richardson=None) -> np.ndarray:
    """Second-order finite-difference solve with ghost-point boundary rows.

    Parameters
    ----------
    richardson : callable, optional
        The forcing as a function of ``x``.  When given, the solve is repeated
        on the grid refined once and the two are combined by Richardson
        extrapolation (fourth order), sampled back on the original grid.
    """
    if richardson is not None:
        n = np.asarray(f).size - 1
        coarse = _fd(k, s, richardson(grid(n)))
        fine = _fd(k, s, richardson(grid(2 * n)))[::2]
        return (4.0 * fine - coarse) / 3.0
    return _fd(k, s, f)


def _fd(k: Kernel, s: float, f: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=complex)
    n = f.size - 1
    h = 1.0 / n
    kh = complex(k.laplace(1j * s))
    beta = 1j * s * kh
    diag = np.full(n + 1, 2.0 / h**2 - s * s, dtype=complex)
    off = np.full(n, -1.0 / h**2, dtype=complex)
    upper = off.copy()
    lower = off.copy()
    # ghost p_{-1} = p_1 - 2h beta p_0 and p_{n+1} = p_{n-1} - 2h beta p_n
    diag[0] += 2.0 * beta / h
    diag[-1] += 2.0 * beta / h
    upper[0] = -2.0 / h**2
    lower[-1] = -2.0 / h**2
    ab = np.zeros((3, n + 1), dtype=complex)
    ab[0, 1:] = upper
    ab[1] = diag
    ab[2, :-1] = lower
    return linalg.solve_banded((1, 1), ab, f)


def green_matrix(k: Kernel, s: float, grid_n: int) -> np.ndarray:
    """Dense discrete solution operator; column ``j`` is the response to node ``j``."""
    op = _Stationary(k, s, grid_n)
    return np.column_stack([op.apply(e) for e in np.eye(grid_n + 1)])


def _norm_at(k: Kernel, s: float, grid_n: int) -> float:
    op = _Stationary(k, s, grid_n)
    w = _trap_weights(grid_n)
    sw, isw = np.sqrt(w), 1.0 / np.sqrt(w)
    m = grid_n + 1
    lin = LinearOperator(
        (m, m),
        matvec=lambda v: sw * op.apply(isw * np.ravel(v)),
        rmatvec=lambda v: isw * op.adjoint(sw * np.ravel(v)),
        dtype=complex,
    )
    v0 = np.ones(m, dtype=complex)
    sv = svds(lin, k=1, which="LM", return_singular_vectors=False, v0=v0, tol=1e-10)
    return float(sv[0])


def resolvent_norm(k: Kernel, s: float, grid_n: int | str = "auto", *, refine: bool = True) -> ResolventProbe:
    """Largest singular value of the discrete solution operator in weighted ``L^2``."""
    n = auto_grid_n(s) if grid_n == "auto" else int(grid_n)
    if n < 64:
        raise ValueError("grid_n must be at least 64")
    nr = _norm_at(k, s, n)
    ratio = _norm_at(k, s, 2 * n) / nr if refine else math.nan
    return ResolventProbe(s=float(s), norm_R=nr, grid_n=n, refinement_ratio=ratio)


def resonant_frequency(k: Kernel, n: int) -> float:
    """Local minimiser of ``|G(i sigma)|`` near ``pi n`` (peak of the resolvent)."""

    def g_abs(sig):
        kh = complex(k.laplace(1j * sig))
        return abs((kh * kh + 1.0) * math.sin(sig) - 2j * kh * math.cos(sig))

    c = math.pi * n
    res = optimize.minimize_scalar(g_abs, bounds=(c - 1.0, c + 1.0), method="bounded", options={"xatol": 1e-10})
    return float(res.x)


@dataclass
class TwoSidedReport:
    sigma: np.ndarray
    proxy: np.ndarray
    s: np.ndarray
    B: np.ndarray
    refinement_ratios: np.ndarray
    probes: list[ResolventProbe] = field(repr=False, default_factory=list)

    @property
    def spread(self) -> float:
        return float(np.max(self.B) / np.min(self.B))


def two_sided_check(
    k: Kernel,
    s_max: float = 1e3,
    grid_n: int | str = "auto",
    *,
    n_log: int = 60,
    s_min: float = 10.0,
    refine: bool = True,
) -> TwoSidedReport:
    """``B(s) = Re khat(is) sup_{1 <= sigma <= s} sigma ||R(i sigma)||`` for ``s`` in ``[s_min, s_max]``."""
    if s_max < 10:
        raise ValueError("s_max must be at least 10")
    res = [resonant_frequency(k, n) for n in range(1, int(s_max / math.pi) + 1)]
    sig = np.union1d(np.geomspace(1.0, s_max, n_log), [r for r in res if 1.0 <= r <= s_max])
    probes = parallel_map(lambda t: resolvent_norm(k, t, grid_n, refine=refine), list(sig))
    proxy = np.array([p.proxy_full for p in probes])
    running = np.maximum.accumulate(proxy)
    mask = sig >= s_min
    s = sig[mask]
    B = np.real(k.laplace(1j * s)) * running[mask]
    ratios = np.array([p.refinement_ratio for p in probes])
    return TwoSidedReport(sigma=sig, proxy=proxy, s=s, B=B, refinement_ratios=ratios, probes=probes)


@dataclass
class LowFrequencyReport:
    s: np.ndarray
    norm_R: np.ndarray

    @property
    def proxy(self) -> np.ndarray:
        """``s * ||R(is)||``."""
        return self.s * self.norm_R

    @property
    def products(self) -> np.ndarray:
        """``s * (s * ||R(is)||)``."""
        return self.s * self.proxy

    @property
    def spread(self) -> float:
        return float(np.max(self.products) / np.min(self.products))

    @property
    def proxy_spread(self) -> float:
        return float(np.max(self.proxy) / np.min(self.proxy))


def low_frequency_check(k: Kernel, s_samples=(0.3, 0.1, 0.03), grid_n: int = 512) -> LowFrequencyReport:
    s = np.asarray(s_samples, dtype=float)
    norms = np.array([resolvent_norm(k, t, grid_n, refine=False).norm_R for t in s])
    return LowFrequencyReport(s=s, norm_R=norms)
