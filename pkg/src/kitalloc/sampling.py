"""Weighted random sampling primitives shared by the selection strategies.

Sampling without replacement uses exponential keys: each candidate with
weight ``w`` draws ``E ~ Exp(1)`` and the ``k`` smallest values of ``E / w``
win.  For ``k = 1`` this is an exponential race, so the winner is ``j`` with
probability exactly ``w_j / sum(w)``.  For ``k > 1`` inclusion probabilities
are increasing in the weight but not proportional to it.
"""
from dataclasses import dataclass

import numpy as np

from ._random import as_rng


@dataclass(frozen=True)
class WeightedCandidate:
    id: int
    weight: float

    def __post_init__(self):
        if not self.weight >= 0:
            raise ValueError(f"weight must be non-negative, got {self.weight!r} for id {self.id}")


def exponential_keys(weights, rng):
    """Log race times ``log(E) - log(w)``; zero weights get ``+inf``.

    Working in logs keeps tiny (subnormal) weights finite and selectable.
    """
    w = np.asarray(weights, dtype=float)
    e = rng.standard_exponential(w.shape[0])
    with np.errstate(divide="ignore"):
        return np.where(w > 0, np.log(e) - np.log(np.where(w > 0, w, 1.0)), np.inf)


def weighted_sample_indices(weights, k, seed=None):
    """Indices of a weighted sample without replacement.

    Parameters
    ----------
    weights : array_like
        Non-negative weights.
    k : int
        Requested sample size; the result has ``min(k, #positive weights)``
        entries, ordered by draw (first winner first).
    seed : int, Generator or None
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1:
        raise ValueError("weights must be one-dimensional")
    if k < 0:
        raise ValueError("k must be non-negative")
    if np.any(~(w >= 0)):
        raise ValueError("weights must be non-negative and finite")
    n_pos = int(np.count_nonzero(w > 0))
    k = min(int(k), n_pos)
    if k == 0:
        return np.empty(0, dtype=np.intp)
    keys = exponential_keys(w, as_rng(seed))
    if k < w.shape[0]:
        part = np.argpartition(keys, k - 1)[:k]
    else:
        part = np.arange(w.shape[0])
    order = np.argsort(keys[part], kind="stable")
    return part[order][:k]


def weighted_sample_without_replacement(candidates, k, seed=None):
    """Draw up to ``k`` distinct ids from ``candidates`` with probability
    increasing in weight.  Zero-weight candidates are never selected."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if not candidates or k == 0:
        return []
    ids = [c.id for c in candidates]
    idx = weighted_sample_indices([c.weight for c in candidates], k, seed)
    return [ids[i] for i in idx]


def top_k_by_score(candidates, k):
    """Ids of the ``k`` largest weights, ties broken by smaller id."""
    if k <= 0:
        return []
    ranked = sorted(candidates, key=lambda c: (-c.weight, c.id))
    return [c.id for c in ranked[:k]]
