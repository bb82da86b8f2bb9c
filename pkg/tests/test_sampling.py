import numpy as np
import pytest
from scipy import stats

from bis_accountant.engine.sampling import (
    ParticipationVector,
    RngStream,
    Source,
    derive_seed,
    sample_output,
    sample_outputs,
    sample_participation,
    sample_participation_batch,
    stream_generator,
)
from bis_accountant.models.schemas import MechanismShape


def test_single_iteration_has_one_subset(rng):
    assert sample_participation(MechanismShape(T=1, k=1), rng).indices == (1,)


def test_full_participation_is_forced(rng):
    assert sample_participation(MechanismShape(T=5, k=5), rng).indices == (1, 2, 3, 4, 5)


def test_subsets_have_exactly_k_sorted_distinct_indices(rng):
    shape = MechanismShape(T=30, k=7)
    subsets = sample_participation_batch(shape, rng, 5000)
    assert subsets.shape == (5000, 7)
    assert np.all(np.diff(subsets, axis=1) > 0)
    assert subsets.min() >= 0 and subsets.max() < 30


def test_subsets_of_four_choose_two_are_uniform(rng):
    draws = 1_000_000
    subsets = sample_participation_batch(MechanismShape(T=4, k=2), rng, draws)
    codes = subsets[:, 0] * 4 + subsets[:, 1]
    _, counts = np.unique(codes, return_counts=True)
    assert len(counts) == 6
    assert np.all(np.abs(counts / draws - 1 / 6) < 0.002)
    assert stats.chisquare(counts).pvalue > 1e-4


def test_marginal_participation_is_k_over_t(rng):
    T, k, draws = 10, 3, 1_000_000
    subsets = sample_participation_batch(MechanismShape(T=T, k=k), rng, draws)
    frequency = np.bincount(subsets.ravel(), minlength=T) / draws
    p = k / T
    standard_error = np.sqrt(p * (1 - p) / draws)
    assert np.all(np.abs(frequency - p) < 4 * standard_error)


def test_vanishing_noise_returns_the_indicator(rng):
    realization = sample_output(MechanismShape(T=3, k=1), 1e-12, Source.FROM_P, rng)
    assert np.allclose(realization.y, realization.participation.indicator(3), atol=1e-9)
    assert np.isclose(realization.y.sum(), 1.0)


def test_full_batch_output_mean(rng):
    y = sample_outputs(MechanismShape(T=2, k=2), 1.0, Source.FROM_P, rng, 1_000_000)
    assert np.all(np.abs(y.mean(axis=0) - 1.0) < 0.005)


def test_single_participation_output_mean(rng):
    y = sample_outputs(MechanismShape(T=2, k=1), 1.0, Source.FROM_P, rng, 1_000_000)
    assert np.all(np.abs(y.mean(axis=0) - 0.5) < 0.005)


def test_outputs_under_q_are_pure_noise(rng):
    y = sample_outputs(MechanismShape(T=3, k=2), 2.0, Source.FROM_Q, rng, 200_000)
    assert np.all(np.abs(y.mean(axis=0)) < 0.03)
    assert np.allclose(y.std(axis=0), 2.0, rtol=0.01)


def test_streams_are_reproducible_and_disjoint():
    shape = MechanismShape(T=8, k=3)
    first = sample_outputs(shape, 0.7, Source.FROM_P, stream_generator(11, 4), 100)
    again = sample_outputs(shape, 0.7, Source.FROM_P, stream_generator(11, 4), 100)
    other = sample_outputs(shape, 0.7, Source.FROM_P, stream_generator(11, 5), 100)
    assert np.array_equal(first, again)
    assert not np.array_equal(first, other)


def test_rng_stream_wraps_the_same_generator():
    stream = RngStream(seed=3, stream_id=9)
    expected = stream_generator(3, 9).standard_normal(5)
    assert np.array_equal(stream.generator.standard_normal(5), expected)


def test_derived_seeds_depend_on_every_key_part():
    assert derive_seed(5, 1, 2) == derive_seed(5, 1, 2)
    assert derive_seed(5, 1, 2) != derive_seed(5, 2, 1)
    assert derive_seed(5, 1, 2) != derive_seed(6, 1, 2)
    assert 0 <= derive_seed(5, 1, 2) < 2**64


def test_indicator_is_one_based():
    assert ParticipationVector((1, 4)).indicator(5).tolist() == [1.0, 0.0, 0.0, 1.0, 0.0]


def test_non_positive_sigma_is_rejected(rng):
    with pytest.raises(ValueError):
        sample_outputs(MechanismShape(T=2, k=1), 0.0, Source.FROM_P, rng, 1)
