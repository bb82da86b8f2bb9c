import math

import numpy as np
import pytest
from scipy import stats

from bis_accountant.core.config import settings
from bis_accountant.core.errors import EnumerationCapError
from bis_accountant.engine.asymptotics import gaussian_mechanism_delta
from bis_accountant.engine.checks import check_closed_form
from bis_accountant.engine.likelihood import exact_log_ratios
from bis_accountant.engine.oracle import enumerate_log_ratio, quadrature_delta_1d
from bis_accountant.models.schemas import MechanismShape


def test_enumeration_of_hand_instance():
    value = enumerate_log_ratio(np.log([1.0, 2.0, 3.0, 4.0]), MechanismShape(T=4, k=2))
    assert value == pytest.approx(math.log(35 / 6), rel=1e-12)


def test_empty_subset_has_ratio_one():
    assert enumerate_log_ratio(np.array([0.3, -1.2, 4.0]), (3, 0)) == 0.0


def test_enumeration_agrees_with_engine_at_sixteen(rng):
    log_w = rng.normal(0.0, 2.0, size=(5, 16))
    oracle = enumerate_log_ratio(log_w, MechanismShape(T=16, k=8))
    engine = exact_log_ratios(log_w, 8)
    assert np.allclose(engine, oracle, rtol=1e-9, atol=0)


def test_sliced_enumeration_matches_a_single_slice(rng, monkeypatch):
    log_w = rng.normal(0.0, 3.0, size=(4, 10))
    whole = enumerate_log_ratio(log_w, (10, 5))
    monkeypatch.setattr(settings, "block_elements", 7)
    sliced = enumerate_log_ratio(log_w, (10, 5))
    assert np.allclose(sliced, whole, rtol=1e-12, atol=1e-12)


def test_enumeration_near_the_cap_stays_in_small_blocks(monkeypatch):
    monkeypatch.setattr(settings, "block_elements", 2**12)
    log_w = np.full((3, 22), 0.25)
    result = enumerate_log_ratio(log_w, MechanismShape(T=22, k=11))
    assert np.allclose(result, 11 * 0.25, rtol=1e-12, atol=1e-12)


def test_enumeration_cap_is_enforced():
    with pytest.raises(EnumerationCapError):
        enumerate_log_ratio(np.zeros(40), MechanismShape(T=40, k=20))


def test_enumeration_rejects_wrong_length():
    with pytest.raises(ValueError):
        enumerate_log_ratio(np.zeros(3), (4, 2))


def test_quadrature_matches_closed_form():
    assert quadrature_delta_1d(1.0, 1.0) == pytest.approx(0.12693, abs=1e-5)
    assert quadrature_delta_1d(1.0, 1.0) == pytest.approx(gaussian_mechanism_delta(1.0, 1.0, 1.0), abs=1e-8)


def test_quadrature_at_zero_epsilon_is_total_variation():
    expected = 2 * stats.norm.cdf(0.5) - 1
    assert quadrature_delta_1d(1.0, 0.0) == pytest.approx(expected, abs=1e-8)
    assert expected == pytest.approx(0.38292, abs=1e-5)


def test_quadrature_vanishes_for_large_sigma():
    assert quadrature_delta_1d(1e3, 1.0) < 1e-10


def test_quadrature_rejects_non_positive_sigma():
    with pytest.raises(ValueError):
        quadrature_delta_1d(0.0, 1.0)


def test_closed_form_agrees_with_quadrature_on_the_grid():
    result = check_closed_form()
    assert result.passed, result.detail
