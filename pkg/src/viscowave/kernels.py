"""Completely monotone boundary kernels and their Laplace transforms.

A kernel is described by its Bernstein measure ``nu`` on ``(0, inf)``::

    k(t)    = int exp(-tau t) dnu(tau)
    khat(z) = int dnu(tau) / (z + tau)

Four families are supported:

``StandardKernel(beta, eps)``
    ``k(t) = exp(-eps t) t**(beta - 1)``, ``khat(z) = Gamma(beta) (eps + z)**(-beta)``.
``PrimeKernel(alpha, beta)``
    ``dnu = tau**alpha dtau`` on ``(0, 1)`` plus ``(tau - 1)**(-beta) dtau`` on
    ``(1, inf)``.  Its transform is evaluated by adaptive quadrature.
``ExponentialKernel(tau0)``
    point mass at ``tau0``, ``khat(z) = 1 / (tau0 + z)``.
``MeasureKernel(nodes, weights)``
    finite sum of point masses.  The empty measure is the undamped
    (Neumann) limit ``khat = 0``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy import integrate

__all__ = [
    "Kernel",
    "StandardKernel",
    "PrimeKernel",
    "ExponentialKernel",
    "MeasureKernel",
    "MeasureQuadrature",
    "ZeroSpectrum",
    "IntegrabilityReport",
    "ConditionReport",
    "KernelDomainError",
    "KernelSpecError",
    "kernel_from_spec",
    "laplace_transform",
    "impedance_parts",
    "check_integrability",
    "classify_zero_spectrum",
    "condition_additional",
    "discretize_measure",
    "validation_points",
]

_QUAD_OPTS = dict(epsabs=1e-14, epsrel=1e-12, limit=400)


class KernelDomainError(ValueError):
    """Raised when a transform is requested on the branch cut of ``khat``."""


class KernelSpecError(ValueError):
    """Malformed kernel description; ``field`` names the offending key."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"kernel.{field_name}: {message}")
        self.field = field_name


class ZeroSpectrum(enum.Enum):
    INVERTIBLE = "Invertible"
    SQUARE_INTEGRABLE_SINGULARITY = "SquareIntegrableSingularity"
    NON_SQUARE_INTEGRABLE_SINGULARITY = "NonSquareIntegrableSingularity"


def _cquad(fn, a, b, **kw):
    """Integrate a complex-valued scalar function over a real interval."""
    opts = dict(_QUAD_OPTS)
    opts.update(kw)
    re = integrate.quad(lambda t: fn(t).real, a, b, **opts)[0]
    im = integrate.quad(lambda t: fn(t).imag, a, b, **opts)[0]
    return complex(re, im)


class Kernel:
    """Base class.  Subclasses are frozen dataclasses."""

    kind: str = ""

    # -- transform -------------------------------------------------------
    def laplace(self, z):
        """``khat(z)``; accepts scalars or complex arrays."""
        z = np.asarray(z, dtype=complex)
        self._check_domain(z)
        out = self._laplace(z)
        return out[()] if out.ndim == 0 else out

    def derivative(self, z):
        """``khat'(z)``."""
        z = np.asarray(z, dtype=complex)
        self._check_domain(z)
        out = self._derivative(z)
        return out[()] if out.ndim == 0 else out

    def _check_domain(self, z: np.ndarray) -> None:
        if np.any(self._on_cut(z)):
            raise KernelDomainError(f"{self.kind} kernel: z on the branch cut / singular set")

    def _on_cut(self, z: np.ndarray) -> np.ndarray:
        atoms = self.atoms()
        if atoms is not None:
            return np.isin(z, -atoms[0].astype(complex))
        return (z.imag == 0.0) & (z.real <= -self.support_min())

    def _laplace(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _derivative(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # -- measure ---------------------------------------------------------
    def support_min(self) -> float:
        """Infimum of the support of ``nu``."""
        raise NotImplementedError

    def atoms(self) -> tuple[np.ndarray, np.ndarray] | None:
        """``(nodes, weights)`` for purely atomic measures, else ``None``."""
        return None

    def inverse_moment(self) -> float:
        """Closed-form ``int tau**-1 dnu`` (equal to ``khat(0)``) or NaN."""
        return math.nan

    def to_spec(self) -> dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class StandardKernel(Kernel):
    beta: float
    eps: float
    kind = "standard"

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise KernelSpecError("beta", f"must lie in (0, 1), got {self.beta}")
        if not self.eps > 0.0:
            raise KernelSpecError("eps", f"must be > 0, got {self.eps}")

    @property
    def density_const(self) -> float:
        # dnu = (tau - eps)**-beta / Gamma(1 - beta) dtau on (eps, inf)
        return 1.0 / math.gamma(1.0 - self.beta)

    def density(self, tau):
        tau = np.asarray(tau, dtype=float)
        u = np.where(tau > self.eps, tau - self.eps, np.inf)
        return self.density_const * u ** (-self.beta)

    def _laplace(self, z):
        return math.gamma(self.beta) * (self.eps + z) ** (-self.beta)

    def _derivative(self, z):
        return -self.beta * math.gamma(self.beta) * (self.eps + z) ** (-self.beta - 1.0)

    def support_min(self):
        return self.eps

    def inverse_moment(self):
        return math.gamma(self.beta) * self.eps ** (-self.beta)

    def to_spec(self):
        return {"kind": "standard", "beta": self.beta, "eps": self.eps}


@dataclass(frozen=True)
class PrimeKernel(Kernel):
    """Measure ``tau**alpha`` on (0,1) plus ``(tau-1)**-beta`` on (1, inf)."""

    alpha: float
    beta: float
    kind = "prime"

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise KernelSpecError("alpha", f"must be > 0, got {self.alpha}")
        if not 0.0 < self.beta < 1.0:
            raise KernelSpecError("beta", f"must lie in (0, 1), got {self.beta}")

    def density(self, tau):
        tau = np.asarray(tau, dtype=float)
        out = np.zeros_like(tau)
        low = (tau > 0) & (tau < 1)
        high = tau > 1
        out[low] = tau[low] ** self.alpha
        out[high] = (tau[high] - 1.0) ** (-self.beta)
        return out

    def _piece_low(self, z: complex, power: int = 1) -> complex:
        # scaled so the integrand is O(1) and the absolute tolerance acts relatively
        a = self.alpha
        c = max(abs(z), 1.0)
        kw = {}
        if -1.0 < z.real < 0.0:
            kw["points"] = [-z.real]  # near-pole when z hugs the cut
        return _cquad(lambda t: t**a / (z / c + t / c) ** power, 0.0, 1.0, **kw) / c**power

    def _piece_high(self, z: complex, power: int = 1) -> complex:
        # (tau-1)^-beta dtau on (1, inf) with tau = 1 + (c^(1-beta) v)^(1/(1-beta)),
        # c = |z + 1|: removes the endpoint singularity and normalizes the scale
        b = self.beta
        q = 1.0 / (1.0 - b)
        zp = z + 1.0
        c = abs(zp)
        zn = zp / c

        def fn(v):
            return 1.0 / (zn + v**q) ** power

        total = _cquad(fn, 0.0, 1.0) + _cquad(fn, 1.0, 8.0) + _cquad(fn, 8.0, np.inf)
        return total * c ** ((1.0 - b) - power) / (1.0 - b)

    def _laplace(self, z):
        flat = [self._piece_low(complex(v)) + self._piece_high(complex(v)) for v in z.ravel()]
        return np.array(flat, dtype=complex).reshape(z.shape)

    def _derivative(self, z):
        flat = [-(self._piece_low(complex(v), 2) + self._piece_high(complex(v), 2)) for v in z.ravel()]
        return np.array(flat, dtype=complex).reshape(z.shape)

    def support_min(self):
        return 0.0

    def inverse_moment(self):
        # int_0^1 tau^(alpha-1) + int_0^inf u^-beta / (1+u) du
        return 1.0 / self.alpha + math.pi / math.sin(self.beta * math.pi)

    def to_spec(self):
        return {"kind": "prime", "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class ExponentialKernel(Kernel):
    tau0: float
    kind = "exp"

    def __post_init__(self):
        if not self.tau0 > 0.0:
            raise KernelSpecError("tau0", f"must be > 0, got {self.tau0}")

    def _laplace(self, z):
        return 1.0 / (self.tau0 + z)

    def _derivative(self, z):
        return -1.0 / (self.tau0 + z) ** 2

    def support_min(self):
        return self.tau0

    def atoms(self):
        return np.array([self.tau0]), np.array([1.0])

    def inverse_moment(self):
        return 1.0 / self.tau0

    def to_spec(self):
        return {"kind": "exp", "tau0": self.tau0}


@dataclass(frozen=True)
class MeasureKernel(Kernel):
    """Finite atomic measure ``sum_j w_j delta_{tau_j}``."""

    nodes: tuple[float, ...] = ()
    weights: tuple[float, ...] = ()
    kind = "measure"

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(float(t) for t in self.nodes))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.nodes) != len(self.weights):
            raise KernelSpecError("weights", "must have the same length as nodes")
        if any(not t > 0.0 for t in self.nodes):
            raise KernelSpecError("nodes", "all nodes must be > 0 (nu({0}) = 0)")
        if any(not w > 0.0 for w in self.weights):
            raise KernelSpecError("weights", "all weights must be > 0")

    @classmethod
    def undamped(cls) -> "MeasureKernel":
        return cls((), ())

    @property
    def is_zero(self) -> bool:
        return not self.nodes

    def _arrays(self):
        return np.asarray(self.nodes, dtype=float), np.asarray(self.weights, dtype=float)

    def _laplace(self, z):
        t, w = self._arrays()
        if t.size == 0:
            return np.zeros_like(z)
        return np.sum(w / (z[..., None] + t), axis=-1)

    def _derivative(self, z):
        t, w = self._arrays()
        if t.size == 0:
            return np.zeros_like(z)
        return -np.sum(w / (z[..., None] + t) ** 2, axis=-1)

    def support_min(self):
        return min(self.nodes) if self.nodes else math.inf

    def atoms(self):
        return self._arrays()

    def inverse_moment(self):
        t, w = self._arrays()
        return float(np.sum(w / t))

    def to_spec(self):
        return {"kind": "measure", "nodes": list(self.nodes), "weights": list(self.weights)}


# ---------------------------------------------------------------------------
# JSON kernel descriptions


_FIELDS = {
    "standard": ("beta", "eps"),
    "prime": ("alpha", "beta"),
    "exp": ("tau0",),
    "measure": ("nodes", "weights"),
}


def kernel_from_spec(spec: dict[str, Any] | str) -> Kernel:
    """Build a kernel from its JSON description (dict or JSON text)."""
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise KernelSpecError("<json>", f"invalid JSON ({exc.msg})") from exc
    if not isinstance(spec, dict):
        raise KernelSpecError("<root>", "must be a JSON object")
    kind = spec.get("kind")
    if kind not in _FIELDS:
        raise KernelSpecError("kind", f"must be one of {sorted(_FIELDS)}, got {kind!r}")
    expected = _FIELDS[kind]
    for name in spec:
        if name != "kind" and name not in expected:
            raise KernelSpecError(name, f"unknown field for kind {kind!r}")
    for name in expected:
        if name not in spec:
            raise KernelSpecError(name, "missing")
    if kind == "measure":
        for name in expected:
            if not isinstance(spec[name], list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in spec[name]
            ):
                raise KernelSpecError(name, "must be a list of numbers")
        return MeasureKernel(tuple(spec["nodes"]), tuple(spec["weights"]))
    values = {}
    for name in expected:
        v = spec[name]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise KernelSpecError(name, f"must be a number, got {v!r}")
        values[name] = float(v)
    cls = {"standard": StandardKernel, "prime": PrimeKernel, "exp": ExponentialKernel}[kind]
    return cls(**values)


# ---------------------------------------------------------------------------
# Operations


def laplace_transform(k: Kernel, z):
    return k.laplace(z)


def impedance_parts(k: Kernel, s: float) -> tuple[float, float, float]:
    """``(Re khat(is), Im khat(is), |khat(is)|)`` for real ``s``."""
    val = complex(k.laplace(1j * s))
    return val.real, val.imag, abs(val)


@dataclass(frozen=True)
class IntegrabilityReport:
    ok: bool
    value: float
    method: str


def check_integrability(k: Kernel) -> IntegrabilityReport:
    """Evaluate ``int tau**-1 dnu``; closed form when one exists."""
    value = k.inverse_moment()
    if math.isfinite(value):
        return IntegrabilityReport(True, value, "closed-form")
    value = _inverse_moment_quadrature(k)
    return IntegrabilityReport(math.isfinite(value), value, "quadrature")


def _inverse_moment_quadrature(k: Kernel) -> float:
    """Adaptive quadrature of ``int tau**-1 dnu``, independent of ``inverse_moment``."""
    if isinstance(k, StandardKernel):
        # (tau - eps)^-beta singularity handled by the algebraic weight
        c, b, e = k.density_const, k.beta, k.eps
        head = integrate.quad(lambda t: 1.0 / t, e, e + 1.0, weight="alg", wvar=(-b, 0.0))[0]
        tail = integrate.quad(lambda t: (t - e) ** (-b) / t, e + 1.0, np.inf, limit=400)[0]
        return c * (head + tail)
    if isinstance(k, PrimeKernel):
        low = integrate.quad(lambda t: t ** (k.alpha - 1.0), 0.0, 1.0)[0]
        head = integrate.quad(lambda t: 1.0 / t, 1.0, 2.0, weight="alg", wvar=(-k.beta, 0.0))[0]
        tail = integrate.quad(lambda t: (t - 1.0) ** (-k.beta) / t, 2.0, np.inf, limit=400)[0]
        return low + head + tail
    nodes, weights = k.atoms()
    return float(np.sum(weights / nodes))


def classify_zero_spectrum(k: Kernel) -> ZeroSpectrum:
    """Invertibility of the generator at zero from the support of ``nu`` near 0."""
    if k.support_min() > 0.0:
        return ZeroSpectrum.INVERTIBLE
    if isinstance(k, PrimeKernel):
        # int_0^1 tau^-2 tau^alpha dtau < inf  <=>  alpha > 1
        if k.alpha > 1.0:
            return ZeroSpectrum.SQUARE_INTEGRABLE_SINGULARITY
        return ZeroSpectrum.NON_SQUARE_INTEGRABLE_SINGULARITY
    raise TypeError(f"cannot classify kernel {k!r}")


@dataclass(frozen=True)
class ConditionReport:
    s: np.ndarray
    q: np.ndarray
    decreasing: bool
    exact_verdict: bool | None


def condition_additional(k: Kernel, alpha_dom: float, s_samples) -> ConditionReport:
    """Sample ``Q(s) = |khat|^3 / (Re khat)^2 * s**alpha (1 + log s)`` on ``i s``.

    ``decreasing`` only describes the samples; an exact verdict is returned for
    standard kernels (``beta > alpha_dom``) and ``None`` otherwise.
    """
    if not 0.0 <= alpha_dom < 1.0:
        raise ValueError("alpha_dom must lie in [0, 1)")
    s = np.asarray(s_samples, dtype=float)
    if np.any(s < 1.0) or np.any(np.diff(s) <= 0):
        raise ValueError("s_samples must be increasing and >= 1")
    kh = np.asarray(k.laplace(1j * s))
    q = np.abs(kh) ** 3 / kh.real**2 * s**alpha_dom * (1.0 + np.log(s))
    decreasing = bool(np.all(np.diff(q) < 0))
    verdict = k.beta > alpha_dom if isinstance(k, StandardKernel) else None
    return ConditionReport(s, q, decreasing, verdict)


# ---------------------------------------------------------------------------
# Measure discretization


@dataclass(frozen=True)
class MeasureQuadrature:
    """Atomic approximation ``sum_j w_j delta_{tau_j}`` of a Bernstein measure.

    ``tail_bound`` is the discrepancy of ``int tau**-1 dnu`` and
    ``max_rel_error`` the worst relative error of the discrete transform on
    :func:`validation_points`.
    """

    nodes: np.ndarray
    weights: np.ndarray
    tail_bound: float = 0.0
    max_rel_error: float = 0.0

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise ValueError("nodes and weights must be 1-d arrays of equal length")
        if nodes.size and (np.any(nodes <= 0) or np.any(np.diff(nodes) <= 0)):
            raise ValueError("nodes must be positive and strictly increasing")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        if not math.isfinite(self.tail_bound):
            raise ValueError("tail_bound must be finite")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    def laplace(self, z):
        z = np.asarray(z, dtype=complex)
        if self.nodes.size == 0:
            return np.zeros_like(z)
        return np.sum(self.weights / (z[..., None] + self.nodes), axis=-1)

    def as_kernel(self) -> MeasureKernel:
        return MeasureKernel(tuple(self.nodes), tuple(self.weights))


def validation_points(n: int = 200, s_min: float = 0.1, s_max: float = 100.0) -> np.ndarray:
    return 1j * np.geomspace(s_min, s_max, n)


def _gauss_log_panels(lo: float, hi: float, count: int, order: int = 4):
    """``count`` Gauss-Legendre nodes in ``log u`` on ``[lo, hi]``; returns ``(u, du)``.

    Panels of ``order`` points; a remainder goes into one lower-order panel
    at the bottom of the range.
    """
    orders = [order] * (count // order)
    if count % order:
        orders.insert(0, count % order)
    edges = np.linspace(math.log(lo), math.log(hi), len(orders) + 1)
    ts, ws = [], []
    for q, a, b in zip(orders, edges[:-1], edges[1:]):
        x, w = np.polynomial.legendre.leggauss(q)
        half = 0.5 * (b - a)
        ts.append(0.5 * (a + b) + half * x)
        ws.append(half * w)
    u = np.exp(np.concatenate(ts))
    return u, u * np.concatenate(ws)


def _tail_moments(density_at, start: float, beta: float, U: float) -> tuple[float, float]:
    """``int_U^inf u**-beta g(u) du`` for ``g = 1/(start+u)`` and its square.

    Uses ``u = U / v`` so the integrals live on ``(0, 1)`` with an algebraic
    endpoint weight.
    """
    scale = U ** (1.0 - beta)
    m1 = integrate.quad(lambda v: 1.0 / (start * v + U), 0.0, 1.0, weight="alg", wvar=(beta - 1.0, 0.0))[0]
    m2 = integrate.quad(lambda v: v / (start * v + U) ** 2, 0.0, 1.0, weight="alg", wvar=(beta - 1.0, 0.0))[0]
    return density_at * scale * m1, density_at * scale * m2


def _lump(m0: float, m1: float) -> tuple[float, float]:
    """Single atom matching ``int dnu`` and ``int tau**-1 dnu`` on a cell."""
    return m0 / m1, m0


def _tail_lump(m1: float, m2: float) -> tuple[float, float]:
    """Single atom matching ``int tau**-1 dnu`` and ``int tau**-2 dnu`` on a tail."""
    return m1 / m2, m1 * m1 / m2


def _standard_atoms(k: StandardKernel, n_nodes: int, tau_max: float, u_min: float):
    c, b, e = k.density_const, k.beta, k.eps
    u_max = tau_max - e
    atoms = []
    # head cell [eps, eps + u_min]
    m0 = c * u_min ** (1.0 - b) / (1.0 - b)
    m1 = c * integrate.quad(lambda t: 1.0 / t, e, e + u_min, weight="alg", wvar=(-b, 0.0))[0]
    atoms.append(_lump(m0, m1))
    # tail [tau_max, inf)
    m1t, m2t = _tail_moments(c, e, b, u_max)
    u, du = _gauss_log_panels(u_min, u_max, n_nodes - 2)
    atoms.extend(zip(e + u, c * u ** (-b) * du))
    atoms.append(_tail_lump(m1t, m2t))
    return atoms


def _prime_atoms(k: PrimeKernel, n_nodes: int, tau_max: float, u_min: float, tau_min: float):
    a, b = k.alpha, k.beta
    atoms = []
    budget = n_nodes - 3
    low_budget = max(1, budget // 3)
    high_budget = max(1, budget - low_budget)
    # (0, 1): tau^alpha, head lump on [0, tau_min]
    atoms.append(_lump(tau_min ** (a + 1) / (a + 1), tau_min**a / a))
    t, dt = _gauss_log_panels(tau_min, 1.0, low_budget)
    atoms.extend(zip(t, t**a * dt))
    # (1, inf): (tau - 1)^-beta
    m0 = u_min ** (1.0 - b) / (1.0 - b)
    m1 = integrate.quad(lambda t: 1.0 / t, 1.0, 1.0 + u_min, weight="alg", wvar=(-b, 0.0))[0]
    atoms.append(_lump(m0, m1))
    u_max = tau_max - 1.0
    u, du = _gauss_log_panels(u_min, u_max, high_budget)
    atoms.extend(zip(1.0 + u, u ** (-b) * du))
    m1t, m2t = _tail_moments(1.0, 1.0, b, u_max)
    atoms.append(_tail_lump(m1t, m2t))
    return atoms


def discretize_measure(
    k: Kernel,
    n_nodes: int,
    tau_max: float = 1e4,
    *,
    u_min: float = 1e-4,
    tau_min: float = 1e-4,
    validation=None,
) -> MeasureQuadrature:
    """Replace ``nu`` by ``n_nodes`` atoms.

    Continuous measures are split into a lumped head cell at the lower end of
    each density piece, composite Gauss-Legendre panels in
    ``log(tau - tau_start)`` and a tail atom beyond ``tau_max`` that matches
    the first two inverse moments of the tail.  Atomic kernels are returned
    exactly.  The achieved errors are reported on the result; nothing is
    asserted here.
    """
    if n_nodes < 1:
        raise ValueError("n_nodes must be >= 1")
    atoms = k.atoms()
    if atoms is not None:
        order = np.argsort(atoms[0])
        return MeasureQuadrature(atoms[0][order], atoms[1][order], 0.0, 0.0)
    if not tau_max > k.support_min() + u_min:
        raise ValueError("tau_max must lie above the support minimum")
    if isinstance(k, StandardKernel):
        if n_nodes < 3:
            raise ValueError("standard kernels need n_nodes >= 3")
        raw = _standard_atoms(k, n_nodes, tau_max, u_min)
    elif isinstance(k, PrimeKernel):
        if n_nodes < 5:
            raise ValueError("prime kernels need n_nodes >= 5")
        raw = _prime_atoms(k, n_nodes, tau_max, u_min, tau_min)
    else:
        raise TypeError(f"cannot discretize {k!r}")
    raw.sort()
    nodes = np.array([t for t, _ in raw])
    weights = np.array([w for _, w in raw])
    zs = validation_points() if validation is None else np.asarray(validation)
    exact = np.asarray(k.laplace(zs))
    approx = np.sum(weights / (zs[:, None] + nodes), axis=-1)
    rel = float(np.max(np.abs(approx - exact) / np.abs(exact)))
    tail = abs(float(np.sum(weights / nodes)) - k.inverse_moment())
    return MeasureQuadrature(nodes, weights, tail, rel)
