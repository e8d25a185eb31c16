from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from viscowave.kernels import MeasureKernel, StandardKernel
from viscowave.spectrum1d import Window
from viscowave.spectrum_disk import (
    BesselMethod,
    bessel_j,
    count_disk_zeros,
    crossover,
    disk_characteristic,
    disk_frequency,
    find_disk_eigenvalues,
    rate_product,
    xi_ratio,
)

# 40-digit roots of J_l'(iz) - i khat(z) J_l(iz) via mpmath.besselj, rounded
REF_DISK_07 = {
    (0, 10): complex(-0.05349280354899155482, 32.29021322772456127),
    (0, 30): complex(-0.02460724433231921323, 95.07675642596998582),
    (0, 80): complex(-0.01234056957717384932, 252.1353897401166875),
    (1, 10): complex(-0.05173802652732415584, 33.84359233773769158),
    (1, 30): complex(-0.02432565434404516411, 96.64190755919342719),
    (1, 80): complex(-0.01228693875975304293, 253.7041205623327042),
}

K07 = StandardKernel(0.7, 1.0)


def test_values_at_zero():
    b0 = bessel_j(0, 0)
    assert (b0.J, b0.Jprime) == (1, 0)
    b1 = bessel_j(1, 0)
    assert (b1.J, b1.Jprime) == (0, 0.5)


def test_first_real_zero():
    b = bessel_j(0, 2.404825557695773)
    assert abs(b.J) < 1e-15
    assert b.J == pytest.approx(complex(mpmath.besselj(0, mpmath.mpf("2.404825557695773"))), abs=1e-16)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 3), st.floats(-80, 80), st.floats(-40, 40))
def test_against_scipy(l, x, y):
    z = complex(x, y)
    b = bessel_j(l, z)
    ref = special.jv(l, z)
    refp = special.jvp(l, z)
    scale = max(1.0, abs(ref), abs(refp))
    assert abs(b.J - ref) <= 1e-10 * scale
    assert abs(b.Jprime - refp) <= 1e-10 * scale


@pytest.mark.parametrize("l", [0, 1, 2])
def test_methods_agree_in_overlap(l):
    c = crossover(l)
    for r in np.linspace(c - 5, c + 5, 7):
        for ang in (0.3, 1.2, 1.5707963267948966, 2.5):
            z = r * np.exp(1j * ang)
            a = bessel_j(l, z, BesselMethod.POWER_SERIES)
            b = bessel_j(l, z, BesselMethod.ASYMPTOTIC)
            scale = max(abs(a.J), abs(a.Jprime))
            assert abs(a.J - b.J) <= 1e-6 * scale
            assert abs(a.Jprime - b.Jprime) <= 1e-6 * scale


def test_method_selection():
    assert bessel_j(0, 10).method is BesselMethod.POWER_SERIES
    assert bessel_j(0, 31).method is BesselMethod.ASYMPTOTIC
    assert bessel_j(2, 33).method is BesselMethod.POWER_SERIES


def test_ode_consistency():
    for l in (0, 1, 2):
        for z in (3.0 + 1.0j, 50.0 + 20.0j):
            b = bessel_j(l, z)
            h = 1e-5
            d2 = (bessel_j(l, z + h).Jprime - bessel_j(l, z - h).Jprime) / (2 * h)
            assert b.second_derivative() == pytest.approx(d2, rel=1e-7, abs=1e-12)


def test_negative_order_rejected():
    with pytest.raises(ValueError):
        bessel_j(-1, 1.0)


@pytest.mark.parametrize("key", sorted(REF_DISK_07))
def test_roots_match_reference(key):
    l, n = key
    (e,) = find_disk_eigenvalues(K07, l, (n, n))
    assert e.z == pytest.approx(REF_DISK_07[key], abs=1e-10)
    assert e.residual <= 1e-8
    assert e.window_count == 1


def test_undamped_roots_are_neumann_values():
    eigs = find_disk_eigenvalues(MeasureKernel.undamped(), 0, (1, 12))
    # J_0' = -J_1, so the nonzero extrema of J_0 are the zeros of J_1
    ref = special.jn_zeros(1, 12)
    got = np.array([e.z.imag for e in eigs])
    assert np.max(np.abs(got - ref)) < 1e-8
    assert max(abs(e.z.real) for e in eigs) < 1e-8
    eigs1 = find_disk_eigenvalues(MeasureKernel.undamped(), 1, (1, 10))
    # for l = 1 the seed s_n sits next to the (n+1)-th zero of J_1'
    ref1 = special.jnp_zeros(1, 11)[1:]
    assert np.max(np.abs(np.array([e.z.imag for e in eigs1]) - ref1)) < 1e-8


def test_characteristic_small_at_seed():
    s = disk_frequency(0, 60)
    d = abs(disk_characteristic(K07, 0, 1j * s))
    assert 0 < d < 1e-2


def test_count_in_windows():
    s = disk_frequency(0, 20)
    assert count_disk_zeros(K07, 0, Window.around(s, math.pi / 2, 2.0, 0.5)) == 1
    assert count_disk_zeros(K07, 0, Window(-2.0, 0.5, s + 0.5 * math.pi + 0.3, s + 0.9 * math.pi)) == 0


@pytest.mark.parametrize("beta", [0.5, 0.7])
def test_xi_ratio_and_rate_product(beta):
    k = StandardKernel(beta, 1.0)
    eigs = find_disk_eigenvalues(k, 0, (10, 80))
    assert all(abs(xi_ratio(k, e) - 1) <= 0.1 for e in eigs if e.n >= 30)
    bound = 1.25 * 2 * math.gamma(beta) * math.cos(beta * math.pi / 2)
    assert max(rate_product(e, beta) for e in eigs) <= bound
    assert all(e.z.real < 0 for e in eigs)


def test_invalid_range():
    with pytest.raises(ValueError):
        find_disk_eigenvalues(K07, 0, (0, 3))
