"""Online mode: per-slot rate limiting with immediate decisions.

The day is split into six four-hour slots.  Slot ``t`` may recommend at
most ``cap_t`` people, where the caps apportion ``K`` by the previous day's
arrival shares.  An arrival is recommended while capacity remains and
either the previous day's slot had fewer than ``cap_t`` arrivals, or the
arrival's score is strictly above the ``cap_t``-th highest score among the
previous day's slot-``t`` arrivals.
"""
import enum
from dataclasses import dataclass, field

import numpy as np

from ._random import as_rng
from .population import N_SLOTS


class Decision(enum.Enum):
    RECOMMEND = "recommend"
    DECLINE = "decline"


def compute_alphas(previous_cohort):
    """Arrival share of each slot on the previous day; uniform when there is
    no previous cohort."""
    if previous_cohort is None or len(previous_cohort) == 0:
        return np.full(N_SLOTS, 1.0 / N_SLOTS)
    counts = previous_cohort.slot_counts().astype(float)
    return counts / counts.sum()


def slot_caps(alphas, k):
    """``floor(alpha_t * k)`` per slot; the rounding leftover goes to the
    slot with the largest share."""
    alphas = np.asarray(alphas, dtype=float)
    caps = np.floor(alphas * k + 1e-9).astype(int)
    caps[int(np.argmax(alphas))] += k - int(caps.sum())
    return caps


@dataclass
class SlotState:
    day: int
    slot: int
    cap: int
    previous_scores: tuple = ()  # previous-day slot scores, descending
    has_previous: bool = True
    accepted_so_far: int = 0

    @property
    def threshold(self):
        """Score to beat, or ``None`` when the slot admits by capacity only."""
        if not self.has_previous or self.cap == 0 or len(self.previous_scores) < self.cap:
            return None
        return self.previous_scores[self.cap - 1]


def decide_online(state, individual, score):
    """Accept or decline one arrival and update the slot counter."""
    if state.accepted_so_far >= state.cap:
        return Decision.DECLINE
    threshold = state.threshold
    if threshold is not None and not score > threshold:
        return Decision.DECLINE
    state.accepted_so_far += 1
    return Decision.RECOMMEND


def open_day(day, k, previous_cohort=None, previous_scores=None):
    """Slot states for ``day`` from yesterday's cohort and its scores
    (``{id: score}``).  Without a previous day every slot uses uniform
    shares and admits by capacity."""
    alphas = compute_alphas(previous_cohort)
    caps = slot_caps(alphas, k)
    has_prev = previous_cohort is not None and len(previous_cohort) > 0 and previous_scores is not None
    per_slot = [[] for _ in range(N_SLOTS)]
    if has_prev:
        for ident, slot in previous_cohort.slot_of.items():
            if ident in previous_scores:
                per_slot[slot].append(previous_scores[ident])
    return [
        SlotState(day=day, slot=t, cap=int(caps[t]),
                  previous_scores=tuple(sorted(per_slot[t], reverse=True)), has_previous=has_prev)
        for t in range(N_SLOTS)
    ]


@dataclass
class OnlineDay:
    recommended: list = field(default_factory=list)
    decisions: int = 0


def run_online_day(states, cohort, scores, seed=None):
    """Stream the cohort through the gate, slot by slot in random order
    within each slot.  Returns the recommended ids in decision order."""
    rng = as_rng(seed)
    out = OnlineDay()
    by_slot = [[] for _ in range(N_SLOTS)]
    for m in cohort.members:
        by_slot[cohort.slot_of[m.id]].append(m)
    for t in range(N_SLOTS):
        arrivals = by_slot[t]
        for i in rng.permutation(len(arrivals)):
            m = arrivals[i]
            out.decisions += 1
            if decide_online(states[t], m, scores[m.id]) is Decision.RECOMMEND:
                out.recommended.append(m.id)
    return out
