import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from weightepi.degree_dist import (
    DegreeDist,
    empirical,
    excess_mean,
    from_csv,
    point_mass,
    poisson,
    power_law,
    power_law_raw_mean,
    sample_degrees,
    size_bias,
)
from weightepi.errors import ParameterError


def test_poisson_pmf_at_zero():
    assert poisson(6).pmf[0] == pytest.approx(math.exp(-6), rel=1e-12)


@pytest.mark.parametrize("mu", [0.5, 2, 6, 14, 40])
def test_poisson_against_scipy(mu):
    d = poisson(mu)
    k = d.degrees
    np.testing.assert_allclose(d.pmf, stats.poisson.pmf(k, mu), rtol=1e-12, atol=1e-15)
    assert d.mean() == pytest.approx(mu, abs=1e-9)
    assert d.tail_discarded < 1e-10


@pytest.mark.parametrize("mu", [0, -1.0])
def test_poisson_rejects_bad_mean(mu):
    with pytest.raises(ParameterError):
        poisson(mu)


@pytest.mark.parametrize("mu", [1, 2, 6, 14])
def test_poisson_size_bias_is_shift(mu):
    d = poisson(mu)
    sb = size_bias(d)
    assert sb.pmf[0] == 0
    np.testing.assert_allclose(sb.pmf[1:], d.pmf[: sb.pmf.size - 1], atol=1e-12)


def test_power_law_raw_mean_matches_zeta_ratio():
    oracle = float(mpmath.zeta(2.5) / mpmath.zeta(3.5))
    # the quoted 1.1907 is a rounding of 1.19060
    assert oracle == pytest.approx(1.1907, abs=2e-4)
    # dropping tail mass 1e-10 (cut-off near 1e4) moves the mean by ~1e-6
    assert power_law_raw_mean(3.5) == pytest.approx(oracle, abs=2e-6)
    assert power_law_raw_mean(3.5, tail=1e-14) == pytest.approx(oracle, abs=1e-8)


@pytest.mark.parametrize("method", ["cutoff", "shift"])
@pytest.mark.parametrize("exponent,mean", [(3.5, 4), (3.5, 14), (4.0, 3), (3.2, 2)])
def test_power_law_hits_target_mean(exponent, mean, method):
    d = power_law(exponent, mean, method=method)
    assert d.mean() == pytest.approx(mean, abs=1e-9)
    assert d.pmf.sum() == pytest.approx(1, abs=1e-12)
    assert d.tail_discarded < 1e-10


def test_power_law_shift_support_starts_after_offset():
    d = power_law(3.5, 4, method="shift")
    offset = math.floor(4 - power_law_raw_mean(3.5))
    assert np.all(d.pmf[: 1 + offset] == 0)
    assert d.pmf[1 + offset] > 0


def test_power_law_cutoff_keeps_pure_tail():
    d = power_law(3.5, 14)
    kmin = int(np.flatnonzero(d.pmf)[0])
    k = np.arange(kmin + 2, kmin + 200)
    ratio = d.pmf[k] * k**3.5
    np.testing.assert_allclose(ratio, ratio[0], rtol=1e-12)


@pytest.mark.parametrize("exponent", [3.0, 2.5])
def test_power_law_needs_finite_variance(exponent):
    with pytest.raises(ParameterError):
        power_law(exponent, 4)


def test_power_law_rejects_mean_below_minimum():
    with pytest.raises(ParameterError):
        power_law(3.5, 1.05)


def test_empirical_examples():
    np.testing.assert_array_equal(empirical([(3, 1.0)]).pmf, [0, 0, 0, 1])
    np.testing.assert_allclose(empirical([(1, 1), (2, 1)]).pmf, [0, 0.5, 0.5])
    np.testing.assert_allclose(empirical([(0, 1), (2, 3)]).pmf, [0.25, 0, 0.75])
    with pytest.raises(ParameterError):
        empirical([])
    with pytest.raises(ParameterError):
        empirical([(1, 0.0)])


def test_from_csv(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("degree,prob\n1,0.5\n3,0.5\n")
    d = from_csv(f)
    np.testing.assert_allclose(d.pmf, [0, 0.5, 0, 0.5])


def test_size_bias_examples():
    np.testing.assert_array_equal(size_bias(point_mass(3)).pmf, [0, 0, 0, 1])
    assert size_bias(empirical([(1, 0.5), (3, 0.5)])).pmf[3] == pytest.approx(0.75, abs=1e-15)
    with pytest.raises(ParameterError):
        size_bias(point_mass(0))


def test_excess_mean_examples():
    assert excess_mean(poisson(6)) == pytest.approx(6, abs=1e-9)
    assert excess_mean(point_mass(3)) == pytest.approx(2, abs=1e-15)
    assert excess_mean(empirical([(1, 0.5), (3, 0.5)])) == pytest.approx(1.5, abs=1e-15)
    with pytest.raises(ParameterError):
        excess_mean(point_mass(0))


def test_sample_degrees_point_mass_and_determinism():
    assert np.all(sample_degrees(point_mass(3), 1000, seed=1) == 3)
    a = sample_degrees(poisson(6), 5000, seed=42)
    b = sample_degrees(poisson(6), 5000, seed=42)
    np.testing.assert_array_equal(a, b)


def test_sample_degrees_poisson_mean_clt():
    n = 10**6
    x = sample_degrees(poisson(6), n, seed=7)
    assert abs(x.mean() - 6) < 3 * math.sqrt(6 / n)


def test_degree_dist_validates_pmf():
    with pytest.raises(ParameterError):
        DegreeDist(np.array([0.5, -0.1]))
    with pytest.raises(ParameterError):
        DegreeDist(np.zeros(3))


pmfs = st.lists(st.floats(0, 1, allow_nan=False), min_size=2, max_size=30).filter(lambda v: sum(v[1:]) > 1e-3)


@settings(max_examples=200, deadline=None)
@given(pmfs)
def test_normalised_and_size_bias_mean_identity(weights):
    d = DegreeDist(np.array(weights))
    assert d.pmf.sum() == pytest.approx(1, abs=1e-12)
    assert np.all(d.pmf >= 0)
    sb = size_bias(d)
    assert sb.pmf.sum() == pytest.approx(1, abs=1e-12)
    assert sb.mean() == pytest.approx(d.moment(2) / d.mean(), rel=1e-9)
    assert excess_mean(d) == pytest.approx(d.mean() + (d.variance() - d.mean()) / d.mean(), rel=1e-9, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.floats(3.05, 5.0), st.floats(0.0, 20.0))
def test_power_law_mean_property(exponent, extra):
    target = power_law_raw_mean(exponent) + extra
    assert power_law(exponent, target).mean() == pytest.approx(target, abs=1e-9)
