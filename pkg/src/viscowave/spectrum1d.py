"""Eigenvalues of the damped wave generator on the unit interval.

The eigenvalues of ``-A`` off the negative real axis are the zeros of the
entire-times-impedance function::

    G(z) = (khat(z)**2 + 1) sin(iz) + 2i khat(z) cos(iz)

Roots sit close to ``i pi n`` and are located by Newton's method from the
leading-order seed ``i pi n - 2 khat(i pi n)``.  Every accepted root is
certified by an argument-principle count over a rectangle around its seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._parallel import parallel_map
from .kernels import Kernel

__all__ = [
    "Eigenvalue",
    "Window",
    "BoundaryTooClose",
    "ConvergenceFailure",
    "CertificationMismatch",
    "characteristic_g",
    "characteristic_g_prime",
    "winding_number",
    "count_zeros",
    "asymptotic_eigenvalue",
    "find_eigenvalues",
    "find_roots",
    "asymptotic_ratio",
]

DEFAULT_TOL = 1e-10


class BoundaryTooClose(RuntimeError):
    """``|f|`` on the contour fell below tolerance; perturb the window."""


class ConvergenceFailure(RuntimeError):
    def __init__(self, n: int, message: str = "Newton iteration did not converge"):
        super().__init__(f"index {n}: {message}")
        self.n = n


class CertificationMismatch(RuntimeError):
    def __init__(self, n: int, count: int):
        super().__init__(f"index {n}: window holds {count} zeros, expected 1")
        self.n = n
        self.count = count


@dataclass(frozen=True)
class Eigenvalue:
    z: complex
    n: int
    residual: float
    seed: complex
    newton_iters: int
    s_n: float = math.nan
    window_count: int = 1

    @property
    def xi(self) -> complex:
        """Shift ``i s_n - z`` from the undamped frequency."""
        return 1j * self.s_n - self.z


@dataclass(frozen=True)
class Window:
    """Closed rectangle ``[re_min, re_max] x [im_min, im_max]``."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("degenerate window")

    @classmethod
    def around(cls, center_im: float, half_height: float, depth: float, right: float) -> "Window":
        return cls(-depth, right, center_im - half_height, center_im + half_height)

    @property
    def centroid(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    def contains(self, z: complex) -> bool:
        return self.re_min < z.real < self.re_max and self.im_min < z.imag < self.im_max

    def corners(self) -> list[complex]:
        return [
            complex(self.re_min, self.im_min),
            complex(self.re_max, self.im_min),
            complex(self.re_max, self.im_max),
            complex(self.re_min, self.im_max),
        ]

    def quadrants(self) -> list["Window"]:
        c = self.centroid
        return [
            Window(self.re_min, c.real, self.im_min, c.imag),
            Window(c.real, self.re_max, self.im_min, c.imag),
            Window(c.real, self.re_max, c.imag, self.im_max),
            Window(self.re_min, c.real, c.imag, self.im_max),
        ]


def characteristic_g(k: Kernel, z):
    kh = k.laplace(z)
    iz = 1j * np.asarray(z, dtype=complex)
    return (kh * kh + 1.0) * np.sin(iz) + 2j * kh * np.cos(iz)


def characteristic_g_prime(k: Kernel, z):
    z = np.asarray(z, dtype=complex)
    kh = k.laplace(z)
    dk = k.derivative(z)
    s, c = np.sin(1j * z), np.cos(1j * z)
    return 2.0 * kh * dk * s + 1j * (kh * kh + 1.0) * c + 2j * dk * c + 2.0 * kh * s


# ---------------------------------------------------------------------------
# Argument principle


def _edge_phase(f, a: complex, b: complex, n: int, tol: float, max_points: int) -> float:
    t = np.linspace(0.0, 1.0, n + 1)
    vals = np.asarray(f(a + (b - a) * t), dtype=complex)
    while True:
        if np.min(np.abs(vals)) < tol:
            raise BoundaryTooClose(f"min |f| on contour below {tol:g}")
        d = np.angle(vals[1:] / vals[:-1])
        bad = np.abs(d) > math.pi / 4
        if not np.any(bad):
            return float(np.sum(d))
        if t.size > max_points:
            raise BoundaryTooClose("phase refinement did not resolve the contour")
        mids = 0.5 * (t[:-1][bad] + t[1:][bad])
        new_vals = np.asarray(f(a + (b - a) * mids), dtype=complex)
        t = np.concatenate([t, mids])
        vals = np.concatenate([vals, new_vals])
        order = np.argsort(t)
        t, vals = t[order], vals[order]


def winding_number(
    f: Callable, window: Window, quad_points: int = 64, *, tol: float = 1e-12, max_points: int = 1 << 16
) -> int:
    """Zeros of a holomorphic ``f`` inside ``window`` (counted with multiplicity).

    The change of ``arg f`` is accumulated along each edge; segments whose
    phase increment exceeds ``pi/4`` are bisected until resolved.
    """
    corners = window.corners()
    total = 0.0
    for a, b in zip(corners, corners[1:] + corners[:1]):
        total += _edge_phase(f, a, b, quad_points, tol, max_points)
    w = total / (2.0 * math.pi)
    r = round(w)
    if abs(w - r) >= 0.1:
        raise BoundaryTooClose(f"winding number {w:.3f} not near an integer")
    return int(r)


def count_zeros(k: Kernel, window: Window, quad_points: int = 64, tol: float = 1e-12) -> int:
    return winding_number(lambda z: characteristic_g(k, z), window, quad_points, tol=tol)


# ---------------------------------------------------------------------------
# Root finding


def asymptotic_eigenvalue(k: Kernel, n: int) -> complex:
    """Leading-order location ``i pi n - 2 khat(i pi n)``."""
    if n == 0:
        raise ValueError("n must be nonzero")
    s = math.pi * n
    return complex(1j * s - 2.0 * k.laplace(1j * s))


def _newton(f, fp, z0: complex, tol: float, max_iter: int = 60):
    z = complex(z0)
    for it in range(1, max_iter + 1):
        g = complex(f(z))
        dg = complex(fp(z))
        if dg == 0 or not np.isfinite(dg):
            return z, it, False
        step = g / dg
        z -= step
        if not np.isfinite(z):
            return z, it, False
        if abs(step) <= 1e-14 * max(1.0, abs(z)) or (abs(complex(f(z))) <= tol and abs(step) < 1e-8):
            return z, it, abs(complex(f(z))) <= tol
    return z, max_iter, abs(complex(f(z))) <= tol


def _isolate(f, window: Window, quad_points: int, depth: int = 0):
    """Subdivide until a sub-window holds exactly one zero."""
    if depth > 12:
        return None
    for sub in window.quadrants():
        try:
            c = winding_number(f, sub, quad_points)
        except BoundaryTooClose:
            shrunk = Window(sub.re_min * 0.999 + 1e-9, sub.re_max, sub.im_min + 1e-7, sub.im_max)
            c = winding_number(f, shrunk, quad_points)
            sub = shrunk
        if c == 1:
            return sub
        if c > 1:
            return _isolate(f, sub, quad_points, depth + 1)
    return None


def find_roots(
    f: Callable,
    fp: Callable,
    seed: complex,
    window: Window,
    n: int,
    tol: float = DEFAULT_TOL,
    quad_points: int = 64,
    s_n: float = math.nan,
) -> Eigenvalue:
    """Newton from ``seed``, escalating to window bisection; then certify."""
    z, iters, ok = _newton(f, fp, seed, tol)
    if not (ok and window.contains(z)):
        sub = _isolate(f, window, quad_points)
        if sub is None:
            raise ConvergenceFailure(n, "no isolating sub-window found")
        z, more, ok = _newton(f, fp, sub.centroid, tol)
        iters += more
        if not (ok and window.contains(z)):
            raise ConvergenceFailure(n)
    count = winding_number(f, window, quad_points)
    if count != 1:
        raise CertificationMismatch(n, count)
    residual = abs(complex(f(z)))
    return Eigenvalue(z=z, n=n, residual=residual, seed=seed, newton_iters=iters, s_n=s_n, window_count=count)


def default_depth(seed: complex) -> float:
    return max(2.0, 2.0 * abs(seed.real) + 1.0)


def find_eigenvalues(
    k: Kernel,
    n_min: int,
    n_max: int,
    tol: float = DEFAULT_TOL,
    *,
    depth: float | None = None,
    right: float = 0.5,
    quad_points: int = 64,
) -> list[Eigenvalue]:
    """One certified root per index ``n`` in ``[n_min, n_max]`` (zero excluded).

    The certification window for index ``n`` is
    ``Re z in [-depth, right]``, ``Im z in [pi n - pi/2, pi n + pi/2]``.
    """
    if n_min > n_max:
        raise ValueError("empty index range")
    f = lambda z: characteristic_g(k, z)  # noqa: E731
    fp = lambda z: characteristic_g_prime(k, z)  # noqa: E731

    def one(n: int) -> Eigenvalue:
        seed = asymptotic_eigenvalue(k, n)
        h = depth if depth is not None else default_depth(seed)
        window = Window.around(math.pi * n, math.pi / 2, h, right)
        return find_roots(f, fp, seed, window, n, tol, quad_points, s_n=math.pi * n)

    indices = [n for n in range(n_min, n_max + 1) if n != 0]
    return parallel_map(one, indices)


def asymptotic_ratio(k: Kernel, eig: Eigenvalue) -> float:
    """``(-Re z_n) / Re khat(i Im z_n)``; tends to 2 along the root sequence."""
    return -eig.z.real / float(np.real(k.laplace(1j * eig.z.imag)))
