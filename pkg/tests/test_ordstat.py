import numpy as np
import pytest

from weightepi.errors import ParameterError, UnsupportedKindError
from weightepi.ordstat import (
    mixed_top_sum,
    order_stat_mean,
    order_stat_means,
    partial_sum_order_means,
    top_sum_order_means,
)
from weightepi.weights import Beta, ExponentialStrength, TabulatedCDF, ThresholdStrength, TwoPoint, Uniform

SKEWED = Beta(0.5, 2.5)


def test_uniform_closed_form():
    for k in (1, 2, 7, 50):
        for j in range(1, k + 1):
            assert order_stat_mean(Uniform(), k, j) == j / (k + 1)


@pytest.mark.parametrize("k", [1, 2, 5, 17, 60, 200])
def test_quadrature_path_reproduces_uniform(k):
    # Beta(1, 1) is the uniform law but takes the quadrature route
    got = order_stat_means(Beta(1, 1), k)
    np.testing.assert_allclose(got, np.arange(1, k + 1) / (k + 1), atol=1e-8, rtol=0)


def test_single_draw_is_mean():
    for m in (SKEWED, Beta(2, 5), TabulatedCDF((0, 0.2, 1), (0, 0.6, 1))):
        assert order_stat_mean(m, 1, 1) == pytest.approx(m.mean(), abs=1e-10)


def test_two_draws_average_to_mean():
    a, b = order_stat_means(SKEWED, 2)
    assert (a + b) / 2 == pytest.approx(1 / 6, abs=1e-10)


@pytest.mark.parametrize("k", [3, 10, 45, 120, 200])
def test_total_sum_identity_and_rank_monotonicity(k):
    e = order_stat_means(SKEWED, k)
    assert e.sum() == pytest.approx(k / 6, abs=1e-8)
    assert np.all(np.diff(e) > 0)


def test_partial_sum_examples():
    assert partial_sum_order_means(SKEWED, 9, 0) == 0.0
    assert partial_sum_order_means(SKEWED, 9, 9) == pytest.approx(9 / 6, abs=1e-8)
    assert partial_sum_order_means(Uniform(), 4, 2) == pytest.approx(0.6, abs=1e-15)


@pytest.mark.parametrize("k", [4, 13, 40, 150])
def test_partial_sums_match_rank_sums(k):
    e = order_stat_means(SKEWED, k)
    for upto in sorted({1, 2, k // 3, k // 2, k // 2 + 1, k - 2, k - 1}):
        assert partial_sum_order_means(SKEWED, k, upto) == pytest.approx(e[:upto].sum(), abs=1e-9)
        assert top_sum_order_means(SKEWED, k, upto) == pytest.approx(e[-upto:].sum(), abs=1e-9)


def test_quadrature_vs_monte_carlo():
    rng = np.random.default_rng(99)
    reps, k = 10**6 // 8, 8
    draws = np.sort(rng.beta(0.5, 2.5, size=(reps, k)), axis=1)
    mc = draws.mean(axis=0)
    se = draws.std(axis=0, ddof=1) / np.sqrt(reps)
    assert np.all(np.abs(order_stat_means(SKEWED, k) - mc) <= 4 * se)


def test_decay_strength_law_supported():
    m = ThresholdStrength(ExponentialStrength(1.0), "decay", 0.5)
    e = order_stat_means(m, 6)
    assert e.sum() == pytest.approx(6 * m.mean(), abs=1e-8)


def test_mixed_top_sum_matches_termwise():
    ks = np.array([2, 3, 5, 8, 30, 90, 400])
    coeffs = np.linspace(0.3, 1.7, ks.size)
    for count in (1, 2):
        want = sum(c * top_sum_order_means(SKEWED, int(k), count) for k, c in zip(ks, coeffs))
        assert mixed_top_sum(SKEWED, ks, coeffs, count) == pytest.approx(want, rel=1e-10)
    want = sum(c * top_sum_order_means(Uniform(), int(k), 2) for k, c in zip(ks, coeffs))
    assert mixed_top_sum(Uniform(), ks, coeffs, 2) == pytest.approx(want, rel=1e-13)


def test_errors():
    with pytest.raises(ParameterError):
        order_stat_mean(SKEWED, 3, 4)
    with pytest.raises(ParameterError):
        order_stat_mean(SKEWED, 0, 1)
    with pytest.raises(ParameterError):
        partial_sum_order_means(SKEWED, 3, 5)
    with pytest.raises(UnsupportedKindError):
        order_stat_mean(TwoPoint(0.1, 1, 0.5), 3, 1)


@pytest.mark.parametrize(
    "m", [SKEWED, Beta(0.3, 0.3), TabulatedCDF((0, 0.2, 1), (0, 0.6, 1))], ids=str
)
@pytest.mark.parametrize("k", [2, 37, 200, 401])
def test_rank_routes_agree(m, k):
    # differences of binomial-identity partial sums are an independent route
    grid = order_stat_means(m, k)
    ps = np.array([partial_sum_order_means(m, k, j) for j in range(k + 1)])
    np.testing.assert_allclose(grid, np.diff(ps), atol=1e-9, rtol=0)
    for j in sorted({1, k // 2 + 1, k}):
        assert order_stat_mean(m, k, j) == pytest.approx(grid[j - 1], abs=1e-9)


def test_kinked_cdf_against_monte_carlo():
    m = TabulatedCDF((0, 0.2, 1), (0, 0.6, 1))
    rng = np.random.default_rng(5)
    draws = np.sort(m.ppf(rng.random((200_000, 9))), axis=1)
    se = draws.std(axis=0, ddof=1) / np.sqrt(draws.shape[0])
    assert np.all(np.abs(order_stat_means(m, 9) - draws.mean(axis=0)) <= 4 * se)
