"""Decay-rate calculus.

Resolvent growth ``M`` at infinity and blow-up ``m`` at zero are turned into
energy envelopes.  Semigroup norm bounds are squared to obtain energy bounds.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize

from .kernels import (
    ExponentialKernel,
    Kernel,
    MeasureKernel,
    PrimeKernel,
    StandardKernel,
    ZeroSpectrum,
    classify_zero_spectrum,
)

__all__ = [
    "Direction",
    "Scenario",
    "NonMonotone",
    "OutOfRange",
    "ScenarioMismatch",
    "RateFunction",
    "EnergyEnvelope",
    "m_from_kernel",
    "m_at_zero",
    "mlog",
    "m_log",
    "invert",
    "power_exponent",
    "predict_energy_envelope",
]


class Direction(enum.Enum):
    INCREASING = "Increasing"
    DECREASING = "Decreasing"


class Scenario(enum.Enum):
    INFINITY_ONLY = "InfinityOnly"
    ZERO_AND_INFINITY = "ZeroAndInfinity"


class NonMonotone(ValueError):
    pass


class OutOfRange(ValueError):
    pass


class ScenarioMismatch(ValueError):
    pass


@dataclass(frozen=True)
class RateFunction:
    """Monotone scalar map on ``[domain[0], domain[1]]``.

    Monotonicity is checked on log-spaced samples at construction.
    """

    eval: Callable[[float], float]
    direction: Direction
    domain: tuple[float, float]
    samples: int = 64

    def __post_init__(self):
        lo, hi = self.domain
        if not (0 < lo < hi):
            raise ValueError("domain must satisfy 0 < lo < hi")
        xs = np.geomspace(lo, hi, self.samples)
        ys = np.array([self.eval(float(x)) for x in xs])
        if not np.all(np.isfinite(ys)):
            raise NonMonotone("rate function is not finite on its domain")
        d = np.diff(ys)
        ok = np.all(d > 0) if self.direction is Direction.INCREASING else np.all(d < 0)
        if not ok:
            raise NonMonotone(f"sampled values are not strictly {self.direction.value.lower()}")

    def __call__(self, s):
        if np.ndim(s):
            return np.array([self.eval(float(x)) for x in np.ravel(s)]).reshape(np.shape(s))
        return self.eval(float(s))

    @property
    def range(self) -> tuple[float, float]:
        a, b = self.eval(self.domain[0]), self.eval(self.domain[1])
        return (min(a, b), max(a, b))


def m_from_kernel(k: Kernel, domain: tuple[float, float] = (1.0, 1e12)) -> RateFunction:
    """``M(s) = 1 / Re khat(is)``.

    Raises
    ------
    NonMonotone
        If the sampled ``M`` is not increasing.
    """
    if isinstance(k, MeasureKernel) and k.is_zero:
        raise NonMonotone("undamped kernel has no finite M")

    def fn(s: float) -> float:
        return 1.0 / float(np.real(k.laplace(1j * s)))

    return RateFunction(fn, Direction.INCREASING, domain)


def m_at_zero(domain: tuple[float, float] = (1e-12, 1.0)) -> RateFunction:
    """``m(s) = 1/s`` near zero."""
    return RateFunction(lambda s: 1.0 / s, Direction.DECREASING, domain)


def mlog(M: RateFunction) -> RateFunction:
    """``M_log(s) = M(s) (log(1 + M(s)) + log(1 + s))``."""
    if M.direction is not Direction.INCREASING:
        raise NonMonotone("mlog needs an increasing M")

    def fn(s: float) -> float:
        v = M.eval(s)
        return v * (math.log1p(v) + math.log1p(s))

    return RateFunction(fn, Direction.INCREASING, M.domain)


def m_log(m: RateFunction) -> RateFunction:
    """``m_log(s) = m(s) (log(1 + m(s)) - log(s))`` for decreasing ``m``."""
    if m.direction is not Direction.DECREASING:
        raise NonMonotone("m_log needs a decreasing m")

    def fn(s: float) -> float:
        v = m.eval(s)
        return v * (math.log1p(v) - math.log(s))

    return RateFunction(fn, Direction.DECREASING, m.domain)


def invert(f: RateFunction, t: float, rtol: float = 1e-10) -> float:
    """Solve ``f(x) = t`` by bracketing in ``log x``.

    Raises
    ------
    OutOfRange
        If ``t`` is outside the range of ``f`` on its domain.
    """
    lo, hi = f.range
    if not (lo <= t <= hi):
        raise OutOfRange(f"t = {t!r} outside [{lo!r}, {hi!r}]")
    a, b = math.log(f.domain[0]), math.log(f.domain[1])
    lt = math.log(t)

    def g(u: float) -> float:
        return math.log(f.eval(math.exp(u))) - lt

    u = optimize.brentq(g, a, b, xtol=rtol * 1e-2, rtol=4 * np.finfo(float).eps, maxiter=500)
    return math.exp(u)


def power_exponent(k: Kernel) -> float | None:
    """``gamma`` with ``M(s) ~ s^gamma`` at infinity, when ``k`` is a known family."""
    if isinstance(k, StandardKernel):
        return k.beta
    if isinstance(k, PrimeKernel):
        return k.beta
    if isinstance(k, ExponentialKernel):
        return 2.0
    return None


@dataclass(frozen=True)
class EnergyEnvelope:
    """Energy envelopes up to a multiplicative constant.

    ``with_log`` uses the logarithmically corrected inverses; ``log_free``
    uses the plain ones.  ``exponent`` is the power-law exponent of the
    log-free branch when it is a pure power.
    """

    scenario: Scenario
    with_log: Callable[[float], float]
    log_free: Callable[[float], float]
    exponent: float | None

    def __call__(self, t):
        return _vec(self.with_log, t)

    def evaluate(self, t, log_free: bool = False):
        return _vec(self.log_free if log_free else self.with_log, t)


def _vec(fn, t):
    if np.ndim(t):
        return np.array([fn(float(x)) for x in np.ravel(t)]).reshape(np.shape(t))
    return fn(float(t))


def predict_energy_envelope(k: Kernel, scenario: Scenario | str = "auto") -> EnergyEnvelope:
    """Energy envelope implied by the resolvent growth of ``k``.

    Raises
    ------
    ScenarioMismatch
        If ``scenario`` disagrees with the zero-spectrum class of ``k`` or
        the kernel is undamped.
    """
    if isinstance(k, MeasureKernel) and k.is_zero:
        raise ScenarioMismatch("undamped kernel: no decay envelope")
    cls = classify_zero_spectrum(k)
    expected = Scenario.INFINITY_ONLY if cls is ZeroSpectrum.INVERTIBLE else Scenario.ZERO_AND_INFINITY
    if scenario == "auto":
        scenario = expected
    scenario = Scenario(scenario) if isinstance(scenario, str) else scenario
    if scenario is not expected:
        raise ScenarioMismatch(f"kernel has {cls.value} at zero; expected scenario {expected.value}")

    M = m_from_kernel(k)
    ML = mlog(M)
    gamma = power_exponent(k)

    def inv_or_floor(f: RateFunction, t: float) -> float:
        # below the range of f the envelope is flat at its value at the domain start
        lo = f.range[0]
        return invert(f, t) if t > lo else f.domain[0]

    if scenario is Scenario.INFINITY_ONLY:

        def with_log(t):
            return inv_or_floor(ML, t) ** -2

        def log_free(t):
            return inv_or_floor(M, t) ** -2

        return EnergyEnvelope(scenario, with_log, log_free, None if gamma is None else -2.0 / gamma)

    m = m_at_zero()
    mL = m_log(m)

    def small(f: RateFunction, t: float) -> float:
        lo = f.range[0]
        return invert(f, t) if t > lo else f.domain[1]

    def with_log(t):
        return (1.0 / inv_or_floor(ML, t) + small(mL, t) + 1.0 / t) ** 2

    def log_free(t):
        return (1.0 / inv_or_floor(M, t) + small(m, t) + 1.0 / t) ** 2

    exp = None if gamma is None else -2.0 * min(1.0 / gamma, 1.0)
    return EnergyEnvelope(scenario, with_log, log_free, exp)
