import math

import numpy as np
import pytest
from scipy import stats

from bis_accountant.engine.asymptotics import (
    bis_moments,
    full_batch_sensitivity,
    gaussian_mechanism_delta,
    gaussian_mechanism_sigma,
    high_noise_loss,
    low_noise_loss,
)
from bis_accountant.engine.checks import CONVERGENCE_FLOOR, high_noise_gaps, low_noise_gaps
from bis_accountant.engine.likelihood import exact_log_ratio, log_weights
from bis_accountant.engine.monte_carlo import estimate_delta
from bis_accountant.engine.sampling import ParticipationVector, sample_participation
from bis_accountant.models.schemas import AccountingConfig, MechanismShape


def test_low_noise_loss_by_substitution():
    shape = MechanismShape(T=2, k=1)
    value = low_noise_loss(ParticipationVector((1,)), np.zeros(2), 1.0, shape)
    assert value == pytest.approx(0.5 - math.log(2), rel=1e-12)


def test_low_noise_loss_is_exact_for_one_iteration(rng):
    shape = MechanismShape(T=1, k=1)
    x = ParticipationVector((1,))
    for sigma in (0.3, 1.0, 4.0):
        w = rng.normal(size=1)
        exact = exact_log_ratio(log_weights(1.0 + sigma * w, sigma), shape).value
        assert low_noise_loss(x, w, sigma, shape) == pytest.approx(exact, rel=1e-12, abs=1e-12)


def test_low_noise_loss_matches_exact_at_small_sigma(rng):
    shape = MechanismShape(T=10, k=2)
    sigma = 1e-3
    for _ in range(20):
        x = sample_participation(shape, rng)
        w = rng.normal(size=10)
        exact = exact_log_ratio(log_weights(x.indicator(10) + sigma * w, sigma), shape).value
        assert low_noise_loss(x, w, sigma, shape) == pytest.approx(exact, rel=1e-4)


def test_high_noise_loss_at_zero_noise_vector():
    shape = MechanismShape(T=6, k=2)
    assert high_noise_loss(np.zeros(6), 3.0, bis_moments(shape), shape) == pytest.approx(-2 / 18)


def test_high_noise_loss_without_covariance_for_full_batch(rng):
    shape = MechanismShape(T=5, k=5)
    w = rng.normal(size=5)
    expected = w.sum() / 2.0 - 5 / 8.0
    assert high_noise_loss(w, 2.0, bis_moments(shape), shape) == pytest.approx(expected, rel=1e-12)


def test_high_noise_loss_matches_exact_at_large_sigma(rng):
    shape = MechanismShape(T=10, k=2)
    moments = bis_moments(shape)
    sigma = 100.0
    for _ in range(20):
        w = rng.normal(size=10)
        exact = exact_log_ratio(log_weights(sigma * w, sigma), shape).value
        assert abs(high_noise_loss(w, sigma, moments, shape) - exact) < 1e-4


def test_low_noise_gap_shrinks():
    shape = MechanismShape(T=10, k=2)
    sups = [float(np.max(low_noise_gaps(sigma, shape))) for sigma in (1e-1, 1e-2, 1e-3)]
    assert all(later <= max(earlier, CONVERGENCE_FLOOR) for earlier, later in zip(sups, sups[1:]))
    assert sups[-1] < 1e-4


def test_high_noise_gap_shrinks():
    shape = MechanismShape(T=10, k=2)
    sups = [float(np.max(high_noise_gaps(sigma, shape))) for sigma in (1e1, 1e2, 1e3)]
    assert sups[0] > sups[1] > sups[2]
    assert sups[-1] < 1e-4


def test_moments_of_balanced_participation():
    moments = bis_moments(MechanismShape(T=10, k=3))
    assert moments.mu.sum() == pytest.approx(3.0)
    assert moments.scale == pytest.approx(10 * 0.3 * 0.7 / 9)
    assert np.trace(moments.covariance) == pytest.approx(moments.trace)
    assert bis_moments(MechanismShape(T=4, k=4)).scale == 0.0


def test_quadratic_form_matches_the_matrix(rng):
    moments = bis_moments(MechanismShape(T=8, k=3))
    w = rng.normal(size=8)
    assert moments.quadratic_form(w) == pytest.approx(w @ moments.covariance @ w, rel=1e-12)


def test_expected_quadratic_form_is_the_trace(rng):
    moments = bis_moments(MechanismShape(T=10, k=3))
    values = moments.quadratic_form(rng.standard_normal((100_000, 10)))
    error = values.std(ddof=1) / math.sqrt(values.size)
    assert abs(values.mean() - moments.trace) < 3 * error


def test_full_batch_sensitivity():
    assert full_batch_sensitivity(MechanismShape(T=100, k=10)) == pytest.approx(1.0)
    assert full_batch_sensitivity(MechanismShape(T=9, k=9)) == pytest.approx(3.0)


def test_gaussian_mechanism_delta_reference_value():
    expected = stats.norm.cdf(-0.5) - math.e * stats.norm.cdf(-1.5)
    assert gaussian_mechanism_delta(1.0, 1.0, 1.0) == pytest.approx(expected, rel=1e-12)
    assert gaussian_mechanism_delta(1.0, 1.0, 1.0) == pytest.approx(0.12693, abs=1e-5)


def test_gaussian_mechanism_delta_limits():
    assert gaussian_mechanism_delta(1.0, 1.0, math.inf) == 0.0
    assert gaussian_mechanism_delta(1.0, 1e4, 1.0) < 1e-12
    assert gaussian_mechanism_delta(1.0, 0.05, 1.0) > 0.99


def test_gaussian_mechanism_delta_deep_tail_is_positive():
    value = gaussian_mechanism_delta(1.0, 1.0, 20.0)
    assert 0.0 < value < 1e-80


def test_gaussian_mechanism_sigma_inverts_delta():
    sigma = gaussian_mechanism_sigma(1.0, 1.0, 1e-2)
    assert gaussian_mechanism_delta(1.0, sigma, 1.0) == pytest.approx(1e-2, rel=1e-9)
    assert 1.8 < sigma < 2.0


@pytest.mark.slow
def test_bis_approaches_the_full_batch_gaussian_as_noise_grows():
    shape = MechanismShape(T=100, k=10)
    epsilon = 0.01
    gaps = []
    for sigma in (5.0, 10.0, 20.0):
        config = AccountingConfig(
            shape=shape, sigma=sigma, epsilon=epsilon, delta_target=0.5, samples=400_000, seed=17,
        )
        estimate = estimate_delta(config, workers=1)
        n = estimate.samples_used
        error = math.sqrt((estimate.sum_of_squares / n - estimate.point**2) / n)
        baseline = gaussian_mechanism_delta(full_batch_sensitivity(shape), sigma, epsilon)
        assert estimate.point >= baseline - 4 * error
        gaps.append((estimate.point - baseline, baseline, error))
    assert gaps[0][0] > gaps[2][0]
    relative, baseline, error = gaps[2][0] / gaps[2][1], gaps[2][1], gaps[2][2]
    assert relative < 0.05 + 4 * error / baseline
