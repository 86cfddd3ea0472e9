import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sensordenoise.errors import ConfigurationError, DimensionMismatchError
from sensordenoise.field import corrupt_random, make_field, random_linear_target, sample_unit_ball
from sensordenoise.learner.linear import LinearHypothesis
from sensordenoise.metrics import ErrorReport, angle_between, angle_error, empirical_error, noise_rate


def _field(n=10000, seed=0):
    X = sample_unit_ball(n, 2, seed)
    return make_field(X, random_linear_target(2, seed))


def test_noise_rate_extremes():
    f = _field(1000)
    assert noise_rate(f) == 0.0
    assert noise_rate(f.with_labels(-f.true_labels)) == 1.0


def test_noise_rate_random_corruption():
    assert 0.33 <= noise_rate(corrupt_random(_field(), 0.35, 1)) <= 0.37


def test_angle_examples():
    e = np.eye(2)
    assert angle_error(e[0], e[0]) == 0.0
    assert angle_error(e[0], -e[0]) == 1.0
    assert angle_error(e[0], e[1]) == pytest.approx(0.5)
    with pytest.raises(DimensionMismatchError):
        angle_between(np.ones(2), np.ones(3))


def test_angle_error_matches_disagreement_mass():
    # orthogonal separators disagree on half of the ball
    X = sample_unit_ball(200000, 3, 2)
    e = np.eye(3)
    frac = np.mean(np.sign(X @ e[0]) != np.sign(X @ e[1]))
    assert frac == pytest.approx(0.5, abs=0.005)


unit3 = st.integers(0, 2**31).map(lambda s: random_linear_target(3, s).weight)


@given(unit3, unit3, unit3)
def test_angle_metric_properties(a, b, c):
    assert angle_error(a, b) == pytest.approx(angle_error(b, a))
    assert 0.0 <= angle_error(a, b) <= 1.0
    assert angle_between(a, c) <= angle_between(a, b) + angle_between(b, c) + 1e-9


def test_empirical_error_trivial_and_constant():
    t = random_linear_target(2, 5)
    assert empirical_error(LinearHypothesis(t.weight), t, 5000, 0) == 0.0

    class Constant:
        def decision(self, X):
            return np.ones(len(X))

    assert empirical_error(Constant(), t, 40000, 1) == pytest.approx(0.5, abs=0.01)
    with pytest.raises(ConfigurationError):
        empirical_error(Constant(), t, 0)


@pytest.mark.parametrize("seed", range(5))
def test_empirical_error_agrees_with_angle(seed):
    rng = np.random.default_rng(seed)
    t = random_linear_target(2, rng)
    h = LinearHypothesis.from_vector(t.weight + 0.4 * rng.standard_normal(2))
    n = 20000
    p = angle_error(h, t.weight)
    se = math.sqrt(max(p * (1 - p), 1e-6) / n)
    assert abs(empirical_error(h, t, n, seed) - p) <= 3 * se + 1e-12


def test_empirical_error_deterministic():
    t = random_linear_target(2, 5)
    h = LinearHypothesis.from_vector([1.0, 0.3])
    assert empirical_error(h, t, 3000, 7) == empirical_error(h, t, 3000, 7)


def test_error_report_validation():
    ErrorReport(0.1, 0.2, 1.0, 30)
    with pytest.raises(ConfigurationError):
        ErrorReport(1.5, 0.1)
    with pytest.raises(ConfigurationError):
        ErrorReport(0.1, 0.1, angle_radians=4.0)
