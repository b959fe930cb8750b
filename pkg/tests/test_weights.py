import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from weightepi.degree_dist import point_mass, poisson
from weightepi.errors import ParameterError, UnsupportedKindError
from weightepi.weights import (
    Beta,
    ContactCount,
    DegreeDependent,
    ExponentialStrength,
    TabulatedCDF,
    ThresholdStrength,
    TwoPoint,
    Uniform,
    WeightFunctionG,
    eval_g,
    is_continuous,
    mean_weight,
    sample_weight,
    sample_weights,
)

N_MC = 10**6


def test_mean_weight_examples():
    assert mean_weight(Uniform()) == 0.5
    assert mean_weight(TwoPoint(0.1, 1, 0.9)) == pytest.approx(0.19, abs=1e-15)
    assert mean_weight(Beta(0.5, 2.5)) == pytest.approx(1 / 6, abs=1e-15)


def test_mean_weight_rejects_degree_dependent():
    with pytest.raises(UnsupportedKindError):
        mean_weight(DegreeDependent(WeightFunctionG("power", 0.5)))
    with pytest.raises(UnsupportedKindError):
        sample_weights(DegreeDependent(WeightFunctionG("power", 0.5)), 0, 3)


def test_contact_count_pgf_identity():
    law = poisson(3)
    m = ContactCount(law, 0.2)
    # Poisson pgf: G(s) = exp(mu (s - 1))
    assert mean_weight(m) == pytest.approx(1 - math.exp(3 * (0.8 - 1)), abs=1e-10)


def test_contact_count_zero_contacts_gives_zero_weight():
    w = sample_weights(ContactCount(point_mass(0), 0.7), 1, 1000)
    assert np.all(w == 0)


def test_two_point_draws_only_two_values():
    w = sample_weights(TwoPoint(0.1, 1, 0.9), 3, 10000)
    assert set(np.unique(w)) == {0.1, 1.0}


def test_two_point_validation():
    with pytest.raises(ParameterError):
        TwoPoint(0.5, 0.5, 0.5)
    with pytest.raises(ParameterError):
        TwoPoint(0.1, 1, 1.5)


def test_threshold_strength_means():
    x = ExponentialStrength(2.0)
    assert mean_weight(ThresholdStrength(x, "indicator", 1.0)) == pytest.approx(math.exp(-0.5), abs=1e-12)
    m = ThresholdStrength(x, "decay", 0.6)
    c = -1 / (2.0 * math.log(0.6))
    # W = 1 - alpha**X is Beta(1, c)
    assert mean_weight(m) == pytest.approx(1 / (1 + c), abs=1e-10)
    u = np.linspace(0.01, 0.99, 7)
    np.testing.assert_allclose(m.cdf(u), stats.beta(1, c).cdf(u), rtol=1e-12)
    np.testing.assert_allclose(m.ppf(u), stats.beta(1, c).ppf(u), rtol=1e-10)
    assert is_continuous(m)
    assert not is_continuous(ThresholdStrength(x, "indicator", 1.0))


def test_tabulated_cdf_matches_uniform_when_linear():
    m = TabulatedCDF((0.0, 0.5, 1.0), (0.0, 0.5, 1.0))
    assert mean_weight(m) == pytest.approx(0.5, abs=1e-15)
    m2 = TabulatedCDF((0.0, 0.5, 1.0), (0.0, 0.8, 1.0))
    # E[W] = int (1 - F): 0.5*(1 - 0.4) + 0.5*(1 - 0.9)
    assert mean_weight(m2) == pytest.approx(0.35, abs=1e-15)
    with pytest.raises(ParameterError):
        TabulatedCDF((0.0, 1.0), (0.0, 0.5))


def test_beta_quadrature_mean_matches_closed_form():
    m = Beta(0.5, 2.5)
    generic = super(Beta, m).mean()
    assert generic == pytest.approx(1 / 6, abs=1e-10)


def test_uniform_sample_mean_clt():
    w = sample_weights(Uniform(), 11, N_MC)
    assert abs(w.mean() - 0.5) < 3 * math.sqrt(1 / 12 / N_MC)


@pytest.mark.parametrize(
    "m",
    [
        Uniform(),
        Beta(0.5, 2.5),
        Beta(2, 2),
        TwoPoint(0.1, 1, 0.9),
        TwoPoint(0.0, 0.4, 0.3),
        ContactCount(poisson(3), 0.2),
        ThresholdStrength(ExponentialStrength(1.5), "indicator", 1.0),
        ThresholdStrength(ExponentialStrength(1.5), "decay", 0.5),
        TabulatedCDF((0.0, 0.3, 1.0), (0.0, 0.7, 1.0)),
    ],
    ids=str,
)
def test_mean_weight_vs_sample_mean(m):
    w = sample_weights(m, 2024, N_MC)
    assert np.all((w >= 0) & (w <= 1))
    se = w.std(ddof=1) / math.sqrt(N_MC)
    assert abs(w.mean() - mean_weight(m)) <= 4 * se + 1e-15


def test_sample_weight_scalar_and_determinism():
    a = sample_weight(Beta(2, 3), 5)
    b = sample_weight(Beta(2, 3), 5)
    assert a == b and 0 <= a <= 1


def test_eval_g_examples():
    assert eval_g(WeightFunctionG("indicator", 2), 1) == 0
    assert eval_g(WeightFunctionG("indicator", 2), 2) == 1
    assert eval_g(WeightFunctionG("power", 1.0), 4) == 0.25
    assert eval_g(WeightFunctionG("geom", 0.3), 0) == 1
    assert eval_g(WeightFunctionG("table", table=(0.2, 0.5)), 7) == 0.5


@pytest.mark.parametrize(
    "kind,param",
    [("power", 1.5), ("power", -0.1), ("geom", 0.0), ("geom", 1.0), ("indicator", -1)],
)
def test_g_parameter_domains(kind, param):
    with pytest.raises(ParameterError):
        WeightFunctionG(kind, param)


def test_g_rejects_negative_degree():
    with pytest.raises(ParameterError):
        WeightFunctionG("power", 0.5)(-1)


@settings(max_examples=200, deadline=None)
@given(
    st.sampled_from(["indicator", "geom", "power"]),
    st.floats(0.01, 0.99),
    st.integers(0, 500),
)
def test_g_values_in_unit_interval(kind, param, k):
    p = param * 10 if kind == "indicator" else param
    v = WeightFunctionG(kind, p)(k)
    assert 0 <= v <= 1


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 5), st.floats(0.01, 5), st.integers(0, 2**32 - 1))
def test_beta_samples_in_unit_interval(a, b, seed):
    w = sample_weights(Beta(a, b), seed, 200)
    assert np.all((w >= 0) & (w <= 1))


def test_labels():
    assert str(Beta(0.5, 2.5)) == "beta(0.5,2.5)"
    assert str(TwoPoint(0.1, 1, 0.9)) == "twopoint(a=0.1,b=1,pa=0.9)"
    assert str(DegreeDependent(WeightFunctionG("power", 0.7))) == "g=power(0.7)"
