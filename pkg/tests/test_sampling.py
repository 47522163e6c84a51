import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from kitalloc.sampling import (
    WeightedCandidate, top_k_by_score, weighted_sample_indices, weighted_sample_without_replacement,
)


def cands(weights):
    return [WeightedCandidate(i, w) for i, w in enumerate(weights)]


def test_exhaustive_draw():
    assert sorted(weighted_sample_without_replacement(cands([1, 1, 1, 1]), 4, seed=0)) == [0, 1, 2, 3]


def test_zero_weight_never_selected():
    for s in range(200):
        assert weighted_sample_without_replacement(cands([0, 5]), 1, seed=s) == [1]


def test_k_capped_by_positive_weights():
    assert sorted(weighted_sample_without_replacement(cands([0, 2, 0, 3]), 10, seed=1)) == [1, 3]


def test_k_zero_and_negative_weight():
    assert weighted_sample_without_replacement(cands([1, 2]), 0) == []
    with pytest.raises(ValueError):
        WeightedCandidate(0, -1.0)
    with pytest.raises(ValueError):
        weighted_sample_indices([1.0, -1.0], 1)


def _k1_frequencies(weights, n, seed):
    rng = np.random.default_rng(seed)
    counts = np.zeros(len(weights))
    for _ in range(n):
        counts[weighted_sample_indices(weights, 1, rng)[0]] += 1
    return counts


def test_k1_marginals_within_two_percent():
    freq = _k1_frequencies([1, 2, 3], 60_000, 7) / 60_000
    np.testing.assert_allclose(freq, [1 / 6, 2 / 6, 3 / 6], atol=0.02)


@pytest.mark.slow
def test_k1_exact_chi_square():
    w = np.array([1.0, 4.0, 2.5, 0.5])
    counts = _k1_frequencies(w, 100_000, 11)
    assert chisquare(counts, 100_000 * w / w.sum()).pvalue > 0.001


@pytest.mark.slow
def test_scale_invariance():
    w = np.array([1.0, 4.0, 2.5, 0.5])
    a = _k1_frequencies(w, 100_000, 3)
    b = _k1_frequencies(w * 37.0, 100_000, 4)
    table = np.vstack([a, b])
    from scipy.stats import chi2_contingency
    assert chi2_contingency(table).pvalue > 0.001


def test_k_greater_than_one_inclusion_monotone_in_weight():
    w = [1.0, 2.0, 4.0, 8.0, 16.0]
    rng = np.random.default_rng(0)
    counts = np.zeros(5)
    for _ in range(20_000):
        counts[weighted_sample_indices(w, 2, rng)] += 1
    assert np.all(np.diff(counts) > 0)


@given(st.lists(st.floats(0, 100), min_size=1, max_size=40), st.integers(0, 50), st.integers(0, 2**32 - 1))
@settings(max_examples=200, deadline=None)
def test_no_duplicates_and_size(weights, k, seed):
    idx = weighted_sample_indices(weights, k, seed)
    positive = sum(w > 0 for w in weights)
    assert len(idx) == min(k, positive)
    assert len(set(idx.tolist())) == len(idx)
    assert all(weights[i] > 0 for i in idx)


def test_deterministic_given_seed():
    w = np.random.default_rng(1).random(100)
    assert np.array_equal(weighted_sample_indices(w, 10, 5), weighted_sample_indices(w, 10, 5))


class TestTopK:
    def test_largest(self):
        assert top_k_by_score(cands([3, 1, 2]), 2) == [0, 2]

    def test_k_exceeds_n(self):
        assert sorted(top_k_by_score(cands([3, 1, 2]), 10)) == [0, 1, 2]

    def test_tie_break_smaller_id(self):
        assert top_k_by_score([WeightedCandidate(i, 1.0) for i in (7, 3, 5)], 1) == [3]
