import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import cohort_of, person
from kitalloc.online import (
    Decision, SlotState, compute_alphas, decide_online, open_day, run_online_day, slot_caps,
)


def cohort_with_slot_counts(counts, day=0):
    slots = [t for t, n in enumerate(counts) for _ in range(n)]
    return cohort_of([person() for _ in slots], day=day, slots=slots)


class TestAlphas:
    def test_shares(self):
        a = compute_alphas(cohort_with_slot_counts([50, 100, 150, 200, 300, 200]))
        np.testing.assert_allclose(a, [0.05, 0.10, 0.15, 0.20, 0.30, 0.20])

    def test_single_slot(self):
        np.testing.assert_array_equal(compute_alphas(cohort_with_slot_counts([7, 0, 0, 0, 0, 0])), [1, 0, 0, 0, 0, 0])

    def test_uniform_fallback(self):
        np.testing.assert_allclose(compute_alphas(None), 1 / 6)
        np.testing.assert_allclose(compute_alphas(cohort_of([])), 1 / 6)

    @given(st.lists(st.integers(0, 40), min_size=6, max_size=6).filter(lambda c: sum(c) > 0))
    @settings(max_examples=50, deadline=None)
    def test_probability_vector(self, counts):
        a = compute_alphas(cohort_with_slot_counts(counts))
        assert np.all(a >= 0) and a.sum() == pytest.approx(1.0)


class TestCaps:
    def test_floor_with_leftover_to_largest_share(self):
        caps = slot_caps([0.05, 0.10, 0.15, 0.20, 0.30, 0.20], 7)
        # floors 0,0,1,1,2,1 = 5; two leftover go to slot 4
        assert caps.tolist() == [0, 0, 1, 1, 4, 1]

    @given(st.lists(st.integers(0, 40), min_size=6, max_size=6).filter(lambda c: sum(c) > 0), st.integers(0, 200))
    @settings(max_examples=100, deadline=None)
    def test_caps_sum_within_budget(self, counts, k):
        caps = slot_caps(compute_alphas(cohort_with_slot_counts(counts)), k)
        assert caps.sum() <= k and np.all(caps >= 0)


class TestDecide:
    def test_sparse_previous_day_admits(self):
        state = SlotState(day=2, slot=0, cap=5, previous_scores=(0.9, 0.8, 0.7))
        assert state.threshold is None
        assert decide_online(state, person(), -100.0) is Decision.RECOMMEND

    def test_cap_reached(self):
        state = SlotState(day=2, slot=0, cap=2, previous_scores=(), accepted_so_far=2)
        assert decide_online(state, person(), 1e9) is Decision.DECLINE
        assert state.accepted_so_far == 2

    def test_order_statistic_threshold(self):
        state = SlotState(day=2, slot=0, cap=2, previous_scores=(0.9, 0.7, 0.5, 0.3))
        assert state.threshold == 0.7
        assert decide_online(state, person(), 0.6) is Decision.DECLINE
        assert decide_online(state, person(), 0.7) is Decision.DECLINE
        assert decide_online(state, person(), 0.8) is Decision.RECOMMEND
        assert state.accepted_so_far == 1

    def test_first_day_capacity_only(self):
        states = open_day(1, 12)
        assert [s.cap for s in states] == [2] * 6
        assert all(s.threshold is None for s in states)

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=20), st.integers(1, 10), st.floats(0, 1), st.floats(0, 1))
    def test_monotone_in_score(self, prev, cap, s1, s2):
        lo, hi = sorted((s1, s2))
        prev = tuple(sorted(prev, reverse=True))
        a = decide_online(SlotState(1, 0, cap, prev), None, lo)
        b = decide_online(SlotState(1, 0, cap, prev), None, hi)
        assert not (a is Decision.RECOMMEND and b is Decision.DECLINE)


def test_open_day_uses_previous_slot_scores():
    prev = cohort_with_slot_counts([4, 2, 0, 0, 0, 0])
    scores = {i: float(j) for j, i in enumerate(prev.ids)}
    states = open_day(2, 3, prev, scores)
    assert [s.cap for s in states] == [2, 1, 0, 0, 0, 0]
    assert states[0].previous_scores == (3.0, 2.0, 1.0, 0.0)
    assert states[0].threshold == 2.0
    assert states[1].threshold == 5.0


@given(st.lists(st.integers(0, 30), min_size=6, max_size=6).filter(lambda c: sum(c) > 0),
       st.lists(st.integers(0, 30), min_size=6, max_size=6), st.integers(0, 40), st.integers(0, 1000))
@settings(max_examples=60, deadline=None)
def test_daily_total_within_budget(prev_counts, today_counts, k, seed):
    rng = np.random.default_rng(seed)
    prev = cohort_with_slot_counts(prev_counts)
    today = cohort_with_slot_counts(today_counts, day=1)
    prev_scores = {i: float(rng.random()) for i in prev.ids}
    scores = {i: float(rng.random()) for i in today.ids}
    states = open_day(1, k, prev, prev_scores)
    day = run_online_day(states, today, scores, seed=seed)
    assert len(day.recommended) <= k
    assert len(set(day.recommended)) == len(day.recommended)
    assert all(s.accepted_so_far <= s.cap for s in states)
    assert day.decisions == len(today)
