from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from viscowave.cluster_square import (
    ClusterSpec,
    WindowViolation,
    annulus_indices,
    boundary_norm_sq,
    boundary_norm_sq_quadrature,
    build_optimality_cluster,
    loglog_slope,
    max_admissible_eps,
    per_row_counts,
    random_cluster,
    single_mode,
    verify_cluster_bounds,
)


def test_constant_mode():
    assert boundary_norm_sq(single_mode(0, 0)) == pytest.approx(4 / math.pi, rel=1e-15)


@pytest.mark.parametrize("m, n", [(1, 1), (3, 7), (40, 2)])
def test_interior_mode(m, n):
    assert boundary_norm_sq(single_mode(m, n)) == pytest.approx(8 / math.pi, rel=1e-15)


def test_edge_mode():
    # one index zero: 2/pi on each of the two edges where the cosine is constant, 1/pi on the others
    assert boundary_norm_sq(single_mode(5, 0)) == pytest.approx(6 / math.pi, rel=1e-15)


def test_distinct_rows_add():
    a = 1 / math.sqrt(2)
    c = ClusterSpec({(3, 4): a, (4, 3): a}, 0.3, 5.0)
    # (3,4) and (4,3) have disjoint edge supports in both edge variables
    assert boundary_norm_sq(c) == pytest.approx(8 / math.pi, rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.floats(5.0, 60.0), st.integers(0, 2**31))
def test_exact_matches_quadrature(s, seed):
    rng = np.random.default_rng(seed)
    c = random_cluster(s, 0.3, rng)
    assert boundary_norm_sq(c) == pytest.approx(boundary_norm_sq_quadrature(c), rel=1e-10, abs=1e-12)


def test_row_decomposition():
    # the boundary norm splits into per-row and per-column edge sums
    rng = np.random.default_rng(3)
    c = random_cluster(30.0, 0.3, rng)
    total = boundary_norm_sq(c)
    rows = {}
    cols = {}
    for (m, n), a in c.coeffs.items():
        cm = 1 / math.sqrt(math.pi) if m == 0 else math.sqrt(2 / math.pi)
        cn = 1 / math.sqrt(math.pi) if n == 0 else math.sqrt(2 / math.pi)
        rows.setdefault(n, [0j, 0j])
        rows[n][0] += a * cm
        rows[n][1] += a * cm * (-1) ** m
        cols.setdefault(m, [0j, 0j])
        cols[m][0] += a * cn
        cols[m][1] += a * cn * (-1) ** n
    manual = sum(abs(u) ** 2 + abs(v) ** 2 for u, v in rows.values())
    manual += sum(abs(u) ** 2 + abs(v) ** 2 for u, v in cols.values())
    assert total == pytest.approx(manual, rel=1e-13)


def test_cluster_validation():
    with pytest.raises(WindowViolation):
        ClusterSpec({(10, 0): 1.0}, 0.3, 5.0)
    with pytest.raises(ValueError):
        ClusterSpec({(3, 4): 0.5}, 0.3, 5.0)
    with pytest.raises(ValueError):
        ClusterSpec({}, 0.3, 5.0)


def test_annulus():
    idx = annulus_indices(5.0, 0.3)
    r2 = idx[:, 0] ** 2 + idx[:, 1] ** 2
    assert np.all((r2 >= 25) & (r2 <= 5.3**2))
    brute = [(m, n) for m in range(7) for n in range(7) if 25 <= m * m + n * n <= 5.3**2]
    assert sorted(map(tuple, idx.tolist())) == sorted(brute)


def test_row_counts_bounded_by_sqrt_s():
    c = max(per_row_counts(s, 0.3).max() / math.sqrt(s) for s in (100, 400, 1600, 6400))
    assert c < 2.0


def test_optimality_examples():
    c400 = build_optimality_cluster(400, 0.1)
    assert len(c400.coeffs) == 2
    c10k = build_optimality_cluster(10_000, 0.1)
    assert len(c10k.coeffs) == 10
    r400 = boundary_norm_sq(c400) / math.sqrt(400)
    r10k = boundary_norm_sq(c10k) / math.sqrt(10_000)
    assert 0.5 <= r10k / r400 <= 2.0
    # N = 1 falls back to one mode
    single = build_optimality_cluster(400, 1e-6)
    assert boundary_norm_sq(single) == pytest.approx(boundary_norm_sq(single_mode(0, 400)))


def test_optimality_window_violation():
    with pytest.raises(WindowViolation):
        build_optimality_cluster(100, 2.0)
    eps = max_admissible_eps([100, 400, 1600, 6400])
    for n1 in (100, 400, 1600, 6400):
        build_optimality_cluster(n1, eps)


def test_loglog_slope():
    x = np.array([1.0, 10.0, 100.0])
    assert loglog_slope(x, 3 * x**0.5) == pytest.approx(0.5)


def test_random_cluster_is_deterministic():
    a = random_cluster(50.0, 0.3, np.random.default_rng(1))
    b = random_cluster(50.0, 0.3, np.random.default_rng(1))
    assert a.coeffs == b.coeffs


def test_verify_bounds_sweep():
    rep = verify_cluster_bounds(0.3, (100, 400, 1600, 6400), trials=200, rng_seed=7)
    assert rep.lower_constant > 0
    assert rep.max_ratio.max() <= 2 * rep.max_ratio[0]
    assert 0.45 <= rep.optimality_slope <= 0.55
    assert abs(rep.eigenfunction_slope) <= 0.05
    assert np.all(rep.min_value >= rep.lower_constant)
