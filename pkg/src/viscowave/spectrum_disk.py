"""Eigenvalues of the damped wave generator on the unit disk.

For angular order ``l`` the eigenvalues with ``Re z < 0`` are zeros of::

    D(z) = J_l'(iz) - i khat(z) J_l(iz)

Roots approach ``i s_n`` with ``s_n = n pi + (2l + 1) pi / 4`` and the
shift ``xi_n = i s_n - z_n`` behaves like ``khat(i s_n)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import mpmath
import numpy as np

from ._parallel import parallel_map
from .kernels import Kernel
from .spectrum1d import Eigenvalue, Window, find_roots, winding_number

__all__ = [
    "BesselMethod",
    "BesselEval",
    "bessel_j",
    "disk_characteristic",
    "disk_characteristic_prime",
    "disk_frequency",
    "find_disk_eigenvalues",
    "count_disk_zeros",
    "xi_ratio",
    "rate_product",
]

HANKEL_TERMS = 12


class BesselMethod(enum.Enum):
    POWER_SERIES = "PowerSeries"
    ASYMPTOTIC = "Asymptotic"


@dataclass(frozen=True)
class BesselEval:
    l: int
    z: complex
    J: complex
    Jprime: complex
    method: BesselMethod

    def second_derivative(self) -> complex:
        """``J''`` from the Bessel equation ``z^2 J'' + z J' + (z^2 - l^2) J = 0``."""
        z = self.z
        return -self.Jprime / z - (1.0 - self.l**2 / z**2) * self.J


def crossover(l: int) -> float:
    return 30.0 + 2.0 * l


def _series(l: int, w: complex) -> complex:
    """Power series in extended precision; cancellation costs ~|w|/ln 10 digits."""
    if w == 0:
        return 1.0 + 0.0j if l == 0 else 0.0j
    dps = 20 + int(abs(w) / math.log(10)) + 5
    with mpmath.workdps(dps):
        x = mpmath.mpc(w.real, w.imag) / 2
        x2 = -(x * x)
        term = x**l / mpmath.factorial(l)
        total = term
        m = 0
        while True:
            m += 1
            term = term * x2 / (m * (m + l))
            total += term
            if abs(term) < abs(total) * mpmath.mpf(10) ** (-dps + 3) and m > abs(x):
                break
        return complex(total)


def _hankel(nu: int, w: complex) -> complex:
    """Hankel expansion, valid for ``Re w >= 0`` and large ``|w|``."""
    mu = 4.0 * nu * nu
    p = 0.0 + 0.0j
    q = 0.0 + 0.0j
    a = 1.0 + 0.0j
    best = math.inf
    for kk in range(2 * HANKEL_TERMS):
        if kk > 0:
            a = a * (mu - (2 * kk - 1) ** 2) / (kk * 8.0 * w)
        if abs(a) > best and kk > 2:
            break
        best = abs(a)
        if kk % 2 == 0:
            p += a if (kk // 2) % 2 == 0 else -a
        else:
            q += a if (kk // 2) % 2 == 0 else -a
    chi = w - (0.5 * nu + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * w)) * (p * np.cos(chi) - q * np.sin(chi))


def _j_raw(l: int, w: complex, method: BesselMethod) -> complex:
    if method is BesselMethod.POWER_SERIES:
        return _series(l, w)
    if w.real < 0:
        return (-1) ** l * _hankel(l, -w)
    return _hankel(l, w)


def bessel_j(l: int, z: complex, method: BesselMethod | None = None) -> BesselEval:
    """``J_l(z)`` and ``J_l'(z)`` for integer ``l >= 0``.

    Uses the power series up to ``|z| = 30 + 2l`` and the Hankel expansion
    beyond; ``method`` forces one branch (for overlap checks).
    """
    if l < 0 or int(l) != l:
        raise ValueError("order l must be a nonnegative integer")
    l = int(l)
    z = complex(z)
    if method is None:
        method = BesselMethod.POWER_SERIES if abs(z) <= crossover(l) else BesselMethod.ASYMPTOTIC
    j = _j_raw(l, z, method)
    if l == 0:
        jp = -_j_raw(1, z, method)
    else:
        jp = 0.5 * (_j_raw(l - 1, z, method) - _j_raw(l + 1, z, method))
    return BesselEval(l=l, z=z, J=complex(j), Jprime=complex(jp), method=method)


def disk_frequency(l: int, n: int) -> float:
    return n * math.pi + (2 * l + 1) * math.pi / 4


def disk_characteristic(k: Kernel, l: int, z: complex) -> complex:
    z = complex(z)
    b = bessel_j(l, 1j * z)
    return complex(b.Jprime - 1j * complex(k.laplace(z)) * b.J)


def disk_characteristic_prime(k: Kernel, l: int, z: complex) -> complex:
    z = complex(z)
    b = bessel_j(l, 1j * z)
    kh = complex(k.laplace(z))
    dk = complex(k.derivative(z))
    return complex(1j * b.second_derivative() + kh * b.Jprime - 1j * dk * b.J)


def _vector(fn):
    def f(z):
        arr = np.asarray(z, dtype=complex)
        return np.vectorize(fn, otypes=[complex])(arr) if arr.ndim else fn(complex(arr))

    return f


def count_disk_zeros(k: Kernel, l: int, window: Window, quad_points: int = 64) -> int:
    return winding_number(_vector(lambda z: disk_characteristic(k, l, z)), window, quad_points)


def find_disk_eigenvalues(
    k: Kernel,
    l: int,
    n_range: tuple[int, int],
    tol: float = 1e-8,
    *,
    depth: float | None = None,
    right: float = 0.5,
    quad_points: int = 64,
) -> list[Eigenvalue]:
    """Certified roots for ``n`` in ``n_range`` (inclusive), seeded at ``i s_n - khat(i s_n)``.

    Index ``n`` labels the root next to ``s_n = n pi + (2l + 1) pi / 4``.  In
    the undamped limit this is the ``n``-th positive zero of ``J_0'`` for
    ``l = 0`` and the ``(n+1)``-th zero of ``J_l'`` for ``l = 1, 2``.
    """
    n_min, n_max = n_range
    if n_min < 1 or n_min > n_max:
        raise ValueError("n_range must satisfy 1 <= n_min <= n_max")
    f = _vector(lambda z: disk_characteristic(k, l, z))
    fp = lambda z: disk_characteristic_prime(k, l, z)  # noqa: E731

    def one(n: int) -> Eigenvalue:
        s = disk_frequency(l, n)
        seed = complex(1j * s - k.laplace(1j * s))
        h = depth if depth is not None else max(2.0, 2.0 * abs(seed.real) + 1.0)
        window = Window.around(s, math.pi / 2, h, right)
        return find_roots(f, fp, seed, window, n, tol, quad_points, s_n=s)

    return parallel_map(one, range(n_min, n_max + 1))


def xi_ratio(k: Kernel, eig: Eigenvalue) -> complex:
    """``xi_n / khat(i s_n)``; tends to 1."""
    return complex(eig.xi / k.laplace(1j * eig.s_n))


def rate_product(eig: Eigenvalue, beta: float) -> float:
    """``(-Re z_n) (Im z_n)^beta``; bounded along the sequence."""
    return float(-eig.z.real * eig.z.imag**beta)


