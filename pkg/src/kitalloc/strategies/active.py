"""Active-learning selection: uncertainty sampling and committee
disagreement.  Both draw a weighted random sample rather than taking the
top scorers, so an early biased model cannot lock selection in."""
from dataclasses import dataclass

import numpy as np

from .._random import as_rng
from ..model import RiskModel, binary_entropy, sgd_fit, utilities
from ..sampling import weighted_sample_indices
from ..selection import SelectionResult


@dataclass(frozen=True)
class Committee:
    members: tuple

    def __post_init__(self):
        if len(self.members) < 2:
            raise ValueError("a committee needs at least two members")
        dims = {m.weights.size for m in self.members}
        if len(dims) != 1:
            raise ValueError("committee members must share one feature encoding")

    def __len__(self):
        return len(self.members)

    def predictions(self, xs):
        """(M, n) matrix of member probabilities."""
        return np.vstack([m.predict_proba(xs) for m in self.members])


def disagreement(committee, xs):
    """Population variance of member predictions per individual; exactly 0
    where all members agree."""
    p = committee.predictions(xs)
    d = p.var(axis=0)
    d[np.ptp(p, axis=0) == 0] = 0.0
    return d


def _result(cohort, k, w, seed, name):
    members = cohort.members
    idx = weighted_sample_indices(w, k, seed)
    total = float(w.sum())
    return SelectionResult(
        day=cohort.day, ids=[members[i].id for i in idx], strategy=name,
        weights={members[i].id: float(w[i]) for i in idx},
        propensities={members[i].id: min(1.0, k * float(w[i]) / total) for i in idx},
        budgeted=k > 1,
    )


def uncertainty_weights(model, members, utility_cfg=None):
    w = binary_entropy(model.predict_proba(members))
    if utility_cfg is not None:
        w = w * utilities(utility_cfg, model, members)
    return w


def select_uncertainty(model, cohort, k, seed=None, utility_cfg=None):
    """Sample by predictive entropy (bits), optionally times ``U(x)``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if not cohort.members:
        return SelectionResult(day=cohort.day, ids=[], strategy="active_uncertainty")
    return _result(cohort, k, uncertainty_weights(model, cohort.members, utility_cfg), seed,
                   "active_uncertainty")


def disagreement_weights(committee, members, lambda_d=1e-3, utility_cfg=None, model=None):
    w = disagreement(committee, members) + lambda_d
    if utility_cfg is not None:
        w = w * utilities(utility_cfg, model or committee.members[0], members)
    return w


def select_disagreement(committee, cohort, k, seed=None, lambda_d=1e-3, utility_cfg=None, model=None):
    """Sample by committee variance plus the smoothing floor ``lambda_d``."""
    if not isinstance(committee, Committee):
        committee = Committee(tuple(committee))
    if k < 0:
        raise ValueError("k must be non-negative")
    if not cohort.members:
        return SelectionResult(day=cohort.day, ids=[], strategy="active_disagreement")
    w = disagreement_weights(committee, cohort.members, lambda_d, utility_cfg, model)
    return _result(cohort, k, w, seed, "active_disagreement")


def retrain_committee(pool, m=10, seed=None, *, epochs=5, learning_rate=0.1, encoder=None):
    """Train ``m`` logistic models on bootstrap resamples of the labelled
    pool (observations with a label)."""
    if m < 2:
        raise ValueError("a committee needs at least two members")
    pool = [o for o in pool if o.y is not None]
    if not pool:
        raise ValueError("labelled pool is empty")
    X = np.vstack([o.x for o in pool])
    y = np.array([o.y for o in pool], dtype=float)
    rng = as_rng(seed)
    members = []
    for _ in range(m):
        idx = rng.integers(0, len(pool), size=len(pool))
        base = RiskModel.zeros(X.shape[1], encoder=encoder, learning_rate=learning_rate)
        members.append(sgd_fit(base, X[idx], y[idx], epochs=epochs, seed=rng))
    return Committee(tuple(members))
