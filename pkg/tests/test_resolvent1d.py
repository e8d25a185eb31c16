from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from viscowave.kernels import ExponentialKernel, MeasureKernel, StandardKernel
from viscowave.resolvent1d import (
    DegenerateDenominator,
    _cumtrap,
    _cumtrap_adjoint,
    _Stationary,
    auto_grid_n,
    green_matrix,
    grid,
    low_frequency_check,
    resolvent_norm,
    resonant_frequency,
    solve_stationary,
    solve_stationary_fd,
    two_sided_check,
)

K07 = StandardKernel(0.7, 1.0)


def exact_constant_forcing(k, s, x):
    """Closed-form solution for f = 1: p = -1/s^2 + A cos(sx) + B sin(sx)."""
    kh = complex(k.laplace(1j * s))
    c = -1.0 / s**2
    # -p'(0) + i s khat p(0) = 0 and p'(1) + i s khat p(1) = 0
    m = np.array(
        [
            [1j * s * kh, -s],
            [-s * math.sin(s) + 1j * s * kh * math.cos(s), s * math.cos(s) + 1j * s * kh * math.sin(s)],
        ]
    )
    rhs = np.array([-1j * s * kh * c, -1j * s * kh * c])
    a, b = np.linalg.solve(m, rhs)
    return c + a * np.cos(s * x) + b * np.sin(s * x)


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def test_zero_forcing_gives_zero():
    assert np.all(solve_stationary(K07, 3.0, np.zeros(65)) == 0)


@pytest.mark.parametrize("k, s", [(ExponentialKernel(1.0), math.pi / 2), (K07, 7.3), (K07, 40.0)])
def test_formula_matches_closed_form_second_order(k, s):
    errs = []
    for n in (256, 512, 1024):
        x = grid(n)
        errs.append(rel(solve_stationary(k, s, np.ones(n + 1)), exact_constant_forcing(k, s, x)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.9)


def test_fd_oracle_constant_forcing():
    k = ExponentialKernel(1.0)
    s = math.pi / 2
    n = 1024
    x = grid(n)
    p = solve_stationary(k, s, np.ones(n + 1))
    q = solve_stationary_fd(k, s, np.ones(n + 1))
    assert rel(p, q) < 1e-5


def test_fd_oracle_at_s100():
    s, n = 100.0, 4096
    x = grid(n)
    f = lambda x: np.sin(math.pi * x)  # noqa: E731
    p = solve_stationary(K07, s, f(x))
    q = solve_stationary_fd(K07, s, f(x), richardson=f)
    assert rel(p, q) < 1e-4
    # the plain second-order solve is limited by dispersion at s h = 0.024
    plain = rel(p, solve_stationary_fd(K07, s, f(x)))
    assert 1e-4 < plain < 1e-3


def test_boundary_conditions_hold():
    s, n = 12.0, 2048
    x = grid(n)
    p = solve_stationary(K07, s, np.cos(3 * x) + x**2)
    h = 1.0 / n
    kh = complex(K07.laplace(1j * s))
    d0 = (-3 * p[0] + 4 * p[1] - p[2]) / (2 * h)
    d1 = (3 * p[-1] - 4 * p[-2] + p[-3]) / (2 * h)
    scale = np.max(np.abs(p)) * s
    assert abs(-d0 + 1j * s * kh * p[0]) < 1e-4 * scale
    assert abs(d1 + 1j * s * kh * p[-1]) < 1e-4 * scale


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_adjoint_is_exact(seed):
    rng = np.random.default_rng(seed)
    n = 50
    h = 1.0 / n
    g = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
    y = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
    assert np.vdot(y, _cumtrap(g, h)) == pytest.approx(np.vdot(_cumtrap_adjoint(y, h), g), rel=1e-12)
    op = _Stationary(K07, rng.uniform(1, 30), n)
    assert np.vdot(y, op.apply(g)) == pytest.approx(np.vdot(op.adjoint(y), g), rel=1e-10)


def test_norm_matches_dense_svd():
    s, n = 9.0, 200
    w = np.full(n + 1, 1.0 / n)
    w[[0, -1]] *= 0.5
    G = green_matrix(K07, s, n)
    dense = np.linalg.norm(np.sqrt(w)[:, None] * G / np.sqrt(w)[None, :], 2)
    assert resolvent_norm(K07, s, n, refine=False).norm_R == pytest.approx(dense, rel=1e-9)


def test_symmetry_in_s():
    a = resolvent_norm(K07, 13.7, 512, refine=False).norm_R
    b = resolvent_norm(K07, -13.7, 512, refine=False).norm_R
    assert a == pytest.approx(b, rel=1e-9)


@pytest.mark.parametrize("s", [5.0, 50.0, 200.0])
def test_refinement_at_512(s):
    p = resolvent_norm(K07, s, 512)
    assert 0.99 <= p.refinement_ratio <= 1.01
    assert p.refined


def test_peak_versus_midpoint_scale():
    # off resonance ||R|| ~ 1/s, at resonance ~ 1/(s Re khat)
    for m in (10, 40):
        mid = math.pi / 2 + math.pi * m
        r_mid = resolvent_norm(K07, mid, refine=False).norm_R
        assert 0.2 < r_mid * mid < 5
        peak = resonant_frequency(K07, m)
        r_peak = resolvent_norm(K07, peak, refine=False).norm_R
        target = 1.0 / (peak * K07.laplace(1j * peak).real)
        assert 0.2 < r_peak / target < 5


def test_resonance_tracks_eigenvalue_imaginary_parts():
    from viscowave.spectrum1d import find_eigenvalues

    eigs = {e.n: e.z for e in find_eigenvalues(K07, 4, 60)}
    for n in range(4, 61, 4):
        assert abs(resonant_frequency(K07, n) - eigs[n].imag) < 0.2
    # the exponential kernel has |Im khat| << 0.1 there, so peaks sit at pi n
    k = ExponentialKernel(1.0)
    for n in range(4, 64, 6):
        assert abs(resonant_frequency(k, n) - math.pi * n) < 0.2


def test_degenerate_denominator():
    with pytest.raises(DegenerateDenominator):
        solve_stationary(MeasureKernel.undamped(), math.pi, np.ones(65))


def test_auto_grid():
    assert auto_grid_n(1.0) == 512
    assert auto_grid_n(1000.0) == 8000
    with pytest.raises(ValueError):
        resolvent_norm(K07, 2.0, 32)


def test_two_sided_exponential():
    rep = two_sided_check(ExponentialKernel(1.0), 200.0, n_log=30)
    assert rep.spread <= 20
    assert np.all((rep.refinement_ratios >= 0.99) & (rep.refinement_ratios <= 1.01))


def test_low_frequency_behaviour():
    # s ||R|| tends to a constant, so s^2 ||R|| falls linearly with s
    for k in (K07, ExponentialKernel(1.0)):
        rep = low_frequency_check(k)
        assert rep.proxy_spread <= 3
        assert rep.products[0] / rep.products[-1] == pytest.approx(10.0, rel=0.15)
