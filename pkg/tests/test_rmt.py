import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from cyclesync.errors import DataError
from cyclesync.ingest import Panel, standardize_rows
from cyclesync.rmt import (
    CorrelationMatrix,
    classify_modes,
    correlation,
    eigen,
    eigensystem,
    ipr,
    market_fraction,
    mp_band,
    mp_cdf,
    mp_density,
    participation_ratio,
)

from conftest import random_panel


def corr_of(matrix):
    return CorrelationMatrix(tuple(f"S{i}" for i in range(len(matrix))), np.asarray(matrix, dtype=float))


def pearson_pairwise(x):
    n, t = x.shape
    out = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            mi, mj = sum(x[i]) / t, sum(x[j]) / t
            cov = sum((x[i, k] - mi) * (x[j, k] - mj) for k in range(t))
            vi = sum((x[i, k] - mi) ** 2 for k in range(t))
            vj = sum((x[j, k] - mj) ** 2 for k in range(t))
            out[i, j] = cov / math.sqrt(vi * vj)
    return out


# ------------------------------------------------------------- correlation


def test_identical_and_negated_rows():
    x = np.array([[1.0, 2.0, 0.5, 4.0], [1.0, 2.0, 0.5, 4.0]])
    c = correlation(Panel(("a", "b"), 0, standardize_rows(x), True)).entries
    np.testing.assert_allclose(c, [[1, 1], [1, 1]], atol=1e-14)
    x[1] = -x[0]
    c = correlation(Panel(("a", "b"), 0, standardize_rows(x), True)).entries
    assert c[0, 1] == pytest.approx(-1.0, abs=1e-14)


def test_correlation_matches_pairwise_pearson(rng):
    x = rng.standard_normal((5, 200))
    c = correlation(Panel(tuple("abcde"), 0, standardize_rows(x), True)).entries
    assert np.abs(c - pearson_pairwise(x)).max() < 1e-12


def test_correlation_needs_standardized_panel(rng):
    with pytest.raises(DataError, match="standardized"):
        correlation(random_panel(rng, 3, 10, standardized=False))


def test_correlation_matrix_validation():
    with pytest.raises(DataError, match="symmetric"):
        corr_of([[1, 0.5], [0.4, 1]])
    with pytest.raises(DataError, match="diagonal"):
        corr_of([[1, 0.5], [0.5, 0.9]])
    with pytest.raises(DataError, match="outside"):
        corr_of([[1, 1.5], [1.5, 1]])


# ------------------------------------------------------------------- eigen


def test_eigen_identity():
    eig = eigen(corr_of(np.eye(5)))
    np.testing.assert_allclose(eig.eigenvalues, 1.0, atol=1e-14)


@pytest.mark.parametrize("n", [2, 5, 8])
def test_eigen_all_ones(n):
    eig = eigen(corr_of(np.ones((n, n))))
    assert eig.eigenvalues[0] == pytest.approx(n, abs=1e-12)
    np.testing.assert_allclose(eig.eigenvalues[1:], 0.0, atol=1e-12)
    np.testing.assert_allclose(eig.vector(0), 1 / math.sqrt(n), atol=1e-12)


@pytest.mark.parametrize("r", [-0.9, -0.3, 0.0, 0.4, 0.95])
def test_eigen_two_by_two(r):
    eig = eigen(corr_of([[1, r], [r, 1]]))
    np.testing.assert_allclose(eig.eigenvalues, sorted([1 + r, 1 - r], reverse=True), atol=1e-14)


def test_eigen_sign_convention_and_order(rng):
    for _ in range(20):
        eig = eigen(correlation(random_panel(rng, 6, 40)))
        assert np.all(np.diff(eig.eigenvalues) <= 0)
        v = eig.eigenvectors
        lead = v[np.argmax(np.abs(v), axis=0), np.arange(6)]
        assert np.all(lead >= 0)


def test_eigen_is_deterministic(rng):
    c = correlation(random_panel(rng, 7, 30))
    a, b = eigen(c), eigen(c)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)


def test_rank_deficient_spectrum_is_clamped(rng):
    # T < N gives exact zeros, which round to tiny negatives
    eig = eigen(correlation(random_panel(rng, 10, 4)))
    assert np.all(eig.eigenvalues >= 0)
    assert np.sum(eig.eigenvalues) == pytest.approx(10, abs=1e-8)


def test_non_psd_matrix_rejected():
    with pytest.raises(DataError, match="positive semi-definite"):
        eigensystem(np.array([[1.0, 0.0], [0.0, -1.0]]), ["a", "b"])


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 50), st.integers(0, 2**31))
def test_eigen_invariants(n, seed):
    rng = np.random.default_rng(seed)
    t = int(rng.integers(2, 3 * n + 2))
    corr = correlation(random_panel(rng, n, t))
    eig = eigen(corr)
    v, w = eig.eigenvectors, eig.eigenvalues
    assert abs(w.sum() - np.trace(corr.entries)) < 1e-8
    assert abs(w.sum() - n) < 1e-8
    assert np.all(w >= -1e-10)
    assert np.abs(v.T @ v - np.eye(n)).max() < 1e-8
    assert np.abs(corr.entries - v * w @ v.T).max() < 1e-8


# ----------------------------------------------------------------- MP band


def test_mp_band_examples():
    band = mp_band(8, 109)
    assert band.q == 13.625
    # published to two decimals by truncation: 0.53 to 1.61
    assert (math.floor(band.lambda_minus * 100), math.floor(band.lambda_plus * 100)) == (53, 161)
    assert band.lambda_minus == pytest.approx(0.5316, abs=5e-5)
    assert band.lambda_plus == pytest.approx(1.6152, abs=5e-5)
    assert mp_band(10, 10).lambda_minus == 0.0
    assert mp_band(10, 10).lambda_plus == 4.0
    b = mp_band(25, 100)
    assert (b.lambda_minus, b.lambda_plus) == (0.25, 2.25)


def test_mp_band_formula_with_sigma():
    b = mp_band(4, 9, sigma2=2.0)
    assert b.lambda_minus == 2.0 * (1 - 1 / math.sqrt(9 / 4)) ** 2
    assert b.lambda_plus == 2.0 * (1 + 1 / math.sqrt(9 / 4)) ** 2


def test_mp_band_refuses_q_below_one():
    with pytest.raises(DataError):
        mp_band(10, 9)
    with pytest.raises(DataError):
        mp_band(3, 10, sigma2=0.0)


def test_mp_density_examples():
    band = mp_band(8, 109)
    assert mp_density(0.1, band) == 0.0
    assert mp_density(5.0, band) == 0.0
    assert mp_density(band.lambda_plus, band) == 0.0
    assert mp_density(band.lambda_minus, band) == 0.0
    q1 = mp_band(5, 5)
    assert mp_density(2.0, q1) == pytest.approx(1 / (2 * math.pi), rel=1e-15)
    assert mp_density(0.0, q1) == 0.0
    arr = mp_density(np.array([0.0, 2.0, 5.0]), q1)
    assert arr.shape == (3,) and arr[1] > 0


def _substitution_quadrature(band, points=10_000):
    """Midpoint rule in theta with lambda = mid - half cos(theta)."""
    lo, hi = band.lambda_minus, band.lambda_plus
    mid, half = (hi + lo) / 2, (hi - lo) / 2
    theta = (np.arange(points) + 0.5) * math.pi / points
    lam = mid - half * np.cos(theta)
    return float(np.sum(mp_density(lam, band) * half * np.sin(theta)) * math.pi / points)


@pytest.mark.parametrize("q", [1, 2, 4, 13.625])
def test_mp_density_normalised(q):
    band = mp_band(8, int(8 * q))
    assert band.q == q
    assert _substitution_quadrature(band) == pytest.approx(1.0, abs=1e-4)
    total, _ = integrate.quad(lambda x: mp_density(x, band), band.lambda_minus, band.lambda_plus, limit=200)
    assert total == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("q", [1, 2, 13.625])
def test_mp_cdf_matches_quadrature(q):
    band = mp_band(8, int(8 * q))
    for x in np.linspace(band.lambda_minus, band.lambda_plus, 9)[1:-1]:
        expected, _ = integrate.quad(lambda y: mp_density(y, band), band.lambda_minus, x, limit=200)
        assert mp_cdf(x, band) == pytest.approx(expected, abs=1e-8)
    assert mp_cdf(band.lambda_minus - 1, band) == 0.0
    assert mp_cdf(band.lambda_plus + 1, band) == 1.0
    assert np.all(np.diff(mp_cdf(np.linspace(0, 5, 50), band)) >= 0)


# ------------------------------------------------------------ classification


def test_classify_all_ones():
    eig = eigen(corr_of(np.ones((8, 8))))
    classes = classify_modes(eig, mp_band(8, 109))
    assert classes.above == (0,)
    assert classes.below == tuple(range(1, 8))
    assert classes.noise == ()


def test_classify_identity_all_noise():
    eig = eigen(corr_of(np.eye(6)))
    assert classify_modes(eig, mp_band(6, 60)).noise == tuple(range(6))


def test_classify_edges_are_noise():
    band = mp_band(4, 16)
    eig = eigen(corr_of(np.eye(2)))
    from dataclasses import replace

    at_edges = replace(eig, eigenvalues=np.array([band.lambda_plus, band.lambda_minus]))
    assert classify_modes(at_edges, band).noise == (0, 1)


def test_classify_published_range():
    band = mp_band(8, 109)
    eig = eigen(corr_of(np.eye(8)))
    from dataclasses import replace

    spread = replace(eig, eigenvalues=np.array([4.33, 1.2, 1.0, 0.6, 0.25, 0.22, 0.2, 0.19]))
    classes = classify_modes(spread, band)
    assert classes.above and classes.below


# ---------------------------------------------------------------------- IPR


@pytest.mark.parametrize("n", [1, 2, 4, 8, 16])
def test_ipr_uniform_and_spike(n):
    uniform = np.full(n, 1 / math.sqrt(n))
    assert ipr(uniform) == pytest.approx(1 / n, rel=1e-14)
    assert participation_ratio(uniform) == pytest.approx(n, rel=1e-14)
    spike = np.zeros(n)
    spike[n // 2] = 1.0
    assert ipr(spike) == 1.0
    assert participation_ratio(spike) == 1.0


def test_ipr_half_half():
    assert ipr([1 / math.sqrt(2), 1 / math.sqrt(2), 0, 0]) == pytest.approx(0.5, rel=1e-15)


def test_ipr_needs_unit_vector():
    with pytest.raises(DataError):
        ipr([1.0, 1.0])


@settings(max_examples=100)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=20).filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_ipr_bounds(values):
    v = np.array(values) / np.linalg.norm(values)
    n = v.size
    assert 1 / n - 1e-12 <= ipr(v) <= 1 + 1e-12
    assert 1 - 1e-12 <= participation_ratio(v) <= n + 1e-12


# ------------------------------------------------------------ market fraction


def test_market_fraction_extremes():
    assert market_fraction(eigen(corr_of(np.ones((8, 8))))) == pytest.approx(1.0, abs=1e-12)
    assert market_fraction(eigen(corr_of(np.eye(8)))) == pytest.approx(1 / 8, abs=1e-14)


def test_market_fraction_permutation_invariant(rng):
    p = random_panel(rng, 7, 50)
    perm = rng.permutation(7)
    q = Panel(tuple(p.labels[i] for i in perm), 0, p.data[perm], True)
    assert market_fraction(eigen(correlation(p))) == pytest.approx(market_fraction(eigen(correlation(q))), abs=1e-12)
