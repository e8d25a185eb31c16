from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from viscowave.kernels import ExponentialKernel, MeasureKernel, PrimeKernel, StandardKernel
from viscowave.spectrum1d import (
    BoundaryTooClose,
    CertificationMismatch,
    Window,
    asymptotic_eigenvalue,
    asymptotic_ratio,
    characteristic_g,
    count_zeros,
    find_eigenvalues,
    find_roots,
    winding_number,
)

# 40-digit Newton on G with mpmath, rounded
REF_STANDARD_07 = {
    1: complex(-0.4537918104048990815, 3.970972251085835461),
    20: complex(-0.06594108024996904176, 62.95844287436002014),
    100: complex(-0.02113531218689940125, 314.2005378568459587),
    300: complex(-0.009771557439777881693, 942.4969404948022131),
}
REF_EXP_1 = {
    1: complex(-0.1174259029115542824, 3.649946317867012861),
    10: complex(-0.002010159935690857907, 31.47937517626437560),
}

K07 = StandardKernel(0.7, 1.0)


def test_undamped_g_is_sine():
    z = np.array([0.3 + 2.0j, -1.0 + 7.0j])
    assert characteristic_g(MeasureKernel.undamped(), z) == pytest.approx(np.sin(1j * z))


def test_exponential_g_nonzero_at_i_pi():
    k = ExponentialKernel(1.0)
    g = characteristic_g(k, 1j * math.pi)
    kh = 1 / (1 + 1j * math.pi)
    assert g == pytest.approx((kh * kh + 1) * np.sin(-math.pi) + 2j * kh * np.cos(-math.pi))
    assert abs(g) > 0.1


@pytest.mark.parametrize("n", sorted(REF_STANDARD_07))
def test_roots_match_high_precision_reference(n):
    (e,) = find_eigenvalues(K07, n, n)
    assert e.z == pytest.approx(REF_STANDARD_07[n], abs=1e-12)
    assert e.residual <= 1e-10
    assert e.window_count == 1


@pytest.mark.parametrize("n", sorted(REF_EXP_1))
def test_exponential_roots_match_reference(n):
    (e,) = find_eigenvalues(ExponentialKernel(1.0), n, n)
    assert e.z == pytest.approx(REF_EXP_1[n], abs=1e-12)


def test_seed_error_is_quadratic_in_impedance():
    eigs = find_eigenvalues(K07, 1, 300)
    for e in eigs:
        kh = abs(K07.laplace(1j * math.pi * e.n))
        assert abs(e.z - e.seed) <= 1.0 * kh**2


def test_asymptotic_eigenvalue_examples():
    k = ExponentialKernel(1.0)
    assert asymptotic_eigenvalue(k, 10) == pytest.approx(10j * math.pi - 2 / (1 + 10j * math.pi))
    assert asymptotic_eigenvalue(K07, -5) == pytest.approx(np.conj(asymptotic_eigenvalue(K07, 5)))
    with pytest.raises(ValueError):
        asymptotic_eigenvalue(k, 0)


def test_seed_real_part_limit():
    beta = 0.7
    n = 10**7
    seed = asymptotic_eigenvalue(K07, n)
    limit = 2 * math.gamma(beta) * math.cos(beta * math.pi / 2)
    assert -seed.real * (math.pi * n) ** beta == pytest.approx(limit, rel=1e-5)


def test_undamped_roots_are_exact():
    eigs = find_eigenvalues(MeasureKernel.undamped(), 1, 30)
    for e in eigs:
        assert abs(e.z - 1j * math.pi * e.n) < 1e-12


def test_conjugate_symmetry():
    pos = find_eigenvalues(K07, 1, 15)
    neg = find_eigenvalues(K07, -15, -1)
    for a, b in zip(pos, reversed(neg)):
        assert b.n == -a.n
        assert b.z == pytest.approx(np.conj(a.z), abs=1e-12)


def test_exponential_ratio_tends_to_two():
    k = ExponentialKernel(1.0)
    eigs = find_eigenvalues(k, 1, 200)
    assert all(e.z.real < 0 for e in eigs)
    r = [asymptotic_ratio(k, e) for e in eigs]
    assert abs(r[-1] - 2) < abs(r[0] - 2)
    assert abs(r[-1] - 2) < 0.02


@pytest.mark.parametrize("beta", [0.3, 0.5, 0.7, 0.9])
def test_ratio_threshold_index(beta):
    k = StandardKernel(beta, 1.0)
    eigs = find_eigenvalues(k, 20, 300)
    bad = [e.n for e in eigs if abs(asymptotic_ratio(k, e) - 2) > 0.1]
    n0 = max(bad) + 1 if bad else 20
    assert n0 <= 100


def test_prime_kernel_roots():
    k = PrimeKernel(2.0, 0.8)
    eigs = find_eigenvalues(k, 5, 8)
    assert all(e.residual <= 1e-10 and e.z.real < 0 for e in eigs)


def test_count_zeros_examples():
    undamped = MeasureKernel.undamped()
    assert count_zeros(undamped, Window(-1, 1, math.pi / 2, 3 * math.pi / 2)) == 1
    assert count_zeros(K07, Window.around(50 * math.pi, 1.0, 1.0, 0.5)) == 1
    # between two seeds, away from both roots
    assert count_zeros(K07, Window(-1, 0.5, 50.2 * math.pi, 50.8 * math.pi)) == 0


def test_completeness_in_strips():
    # every strip of height pi around pi n holds exactly the returned root
    eigs = find_eigenvalues(K07, 5, 25, depth=3.0)
    for e in eigs:
        w = Window.around(math.pi * e.n, math.pi / 2, 3.0, 0.5)
        assert count_zeros(K07, w) == 1
        assert w.contains(e.z)


def test_boundary_too_close():
    w = Window(-1.0, 1.0, 0.0, 2.0)  # root of sin(iz) at 0 sits on the lower edge
    with pytest.raises(BoundaryTooClose):
        winding_number(lambda z: np.sin(1j * z), w, tol=1e-12)


def test_certification_mismatch_for_double_window():
    f = lambda z: np.sin(1j * z)  # noqa: E731
    fp = lambda z: 1j * np.cos(1j * z)  # noqa: E731
    w = Window(-1.0, 1.0, 0.5 * math.pi, 2.5 * math.pi)
    with pytest.raises(CertificationMismatch) as info:
        find_roots(f, fp, 1j * math.pi, w, 1)
    assert info.value.count == 2


@settings(max_examples=25, deadline=None)
@given(st.integers(-3, 3), st.floats(0.1, 0.9))
def test_winding_counts_polynomial_roots(shift, frac):
    # product of linear factors with known roots
    roots = np.array([frac + 1j * shift, -frac + 1j * (shift + 0.5), 3.0 + 0j])
    f = lambda z: np.prod([z - r for r in roots], axis=0)  # noqa: E731
    w = Window(-1.0, 1.0, shift - 0.25, shift + 0.75)
    assert winding_number(f, w) == 2


def test_window_validation():
    with pytest.raises(ValueError):
        Window(1.0, 0.0, 0.0, 1.0)
    assert len(Window(0, 1, 0, 1).quadrants()) == 4
