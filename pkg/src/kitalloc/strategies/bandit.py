"""Budgeted contextual bandit with one-day-delayed labels.

The daily loop is Update (retrain the scoring model on newly visible
labels), Prediction (turn scores into recommendation probabilities) and
Selection (weighted sampling of ``K`` people by those probabilities).
Also provides inverse-propensity and doubly robust off-policy estimates.
"""
from dataclasses import dataclass, replace

import numpy as np

from ..model import RiskModel, sgd_fit, sigmoid
from ..sampling import weighted_sample_indices
from ..selection import SelectionResult


@dataclass(frozen=True)
class CostConfig:
    """Reward of testing an infected person and (non-positive) cost of
    testing a healthy one.  Not testing is worth 0 either way."""

    reward_tp: float = 1.0
    cost_fp: float = -0.1

    def __post_init__(self):
        if not self.reward_tp > 0:
            raise ValueError("reward_tp must be positive")
        if self.cost_fp > 0:
            raise ValueError("cost_fp must be <= 0")

    def reward(self, a, y):
        if a == 0:
            return 0.0
        return self.reward_tp if y == 1 else self.cost_fp

    def expected_reward_of_testing(self, p):
        return p * self.reward_tp + (1 - p) * self.cost_fp


@dataclass(frozen=True)
class BanditPolicy:
    """``P(a=1|x) = eps/2 + (1 - eps) * sigmoid(f(x) / temperature)``."""

    model: RiskModel
    epsilon: float = 0.1
    temperature: float = 1.0

    def __post_init__(self):
        if not 0 <= self.epsilon <= 1:
            raise ValueError("epsilon must lie in [0, 1]")
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")

    def prob_test(self, xs):
        """Vectorised recommendation probability for a matrix or individuals."""
        z = self.model.decision_function(xs) / self.temperature
        return self.epsilon / 2 + (1 - self.epsilon) * sigmoid(z)


def _feedback_arrays(feedback, cost):
    labelled = []
    for o in feedback:
        if not o.propensity > 0:
            raise ValueError(f"observation {o.id} has non-positive propensity {o.propensity}")
        if o.a == 1 and o.y is not None:
            labelled.append(o)
    if not labelled:
        return None
    X = np.vstack([o.x for o in labelled])
    y = np.array([o.y for o in labelled], dtype=float)
    # cost-sensitive importance weights: sigmoid(f) = 1/2 at the break-even risk
    cw = np.where(y == 1, cost.reward_tp, -cost.cost_fp)
    w = cw / np.array([o.propensity for o in labelled])
    return X, y, w, {o.day for o in labelled}


def bandit_update(policy, feedback, cost=CostConfig(), seed=None):
    """Retrain the scoring model on importance-weighted log-loss.

    Each tested observation is weighted by ``cost / propensity`` where the
    cost factor is ``reward_tp`` for positives and ``|cost_fp|`` for
    negatives.  Empty feedback returns ``policy`` unchanged.
    """
    arrays = _feedback_arrays(feedback, cost)
    if arrays is None:
        return policy
    X, y, w, days = arrays
    model = sgd_fit(policy.model, X, y, sample_weight=w, seed=seed)
    model = replace(model, label_days=policy.model.label_days | days)
    return replace(policy, model=model)


def bandit_predict(policy, cohort):
    """``{id: P(a=1|x)}`` for each cohort member."""
    members = getattr(cohort, "members", cohort)
    if not members:
        return {}
    p = policy.prob_test(members)
    return {m.id: float(q) for m, q in zip(members, p)}


def bandit_select(policy, cohort, k, seed=None, calibrate_budget=False):
    """Weighted sampling of ``k`` members by recommendation probability.

    Logged propensity: for ``k == 1`` the exact selection probability
    ``P_j / sum(P)``; for ``k > 1`` the raw ``P(a=1|x)`` with the result
    flagged ``budgeted``, or ``min(1, P * k / sum(P))`` when
    ``calibrate_budget`` is set.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    members = cohort.members
    p = policy.prob_test(members) if members else np.zeros(0)
    idx = weighted_sample_indices(p, k, seed)
    total = float(p.sum())
    if k == 1:
        prop = p / total
    elif calibrate_budget:
        prop = np.minimum(1.0, p * k / total)
    else:
        prop = p
    ids = [members[i].id for i in idx]
    return SelectionResult(
        day=cohort.day, ids=ids, strategy="bandit",
        weights={members[i].id: float(p[i]) for i in idx},
        propensities={members[i].id: float(prop[i]) for i in idx},
        budgeted=k > 1,
    )


@dataclass(frozen=True)
class OffPolicyEstimate:
    dr: float
    ips: float


def _target_prob(target, X):
    if isinstance(target, BanditPolicy):
        return target.prob_test(X)
    return np.asarray(target(X), dtype=float)


def dr_evaluate(target_policy, log, cost=CostConfig(), reward_model=None):
    """Doubly robust and IPS estimates of the average reward of
    ``target_policy`` from logged data.

    ``target_policy`` is a :class:`BanditPolicy` or a callable mapping an
    encoded matrix to ``P(a=1|x)``.  The reward model's ``p(y=1|x)`` gives
    ``r_hat(x, 1)``; ``r_hat(x, 0) = 0``.  The target's action is integrated
    out exactly rather than sampled, so the estimates are deterministic.
    """
    if not log:
        raise ValueError("log is empty")
    props = np.array([o.propensity for o in log], dtype=float)
    if np.any(~(props > 0)):
        raise ValueError("all propensities must be positive")
    X = np.vstack([o.x for o in log])
    a = np.array([o.a for o in log])
    for o in log:
        if o.a == 1 and o.y is None:
            raise ValueError(f"tested observation {o.id} has no label")
    r = np.array([cost.reward(o.a, o.y) for o in log])
    pi1 = _target_prob(target_policy, X)
    pi_taken = np.where(a == 1, pi1, 1 - pi1)
    ips = pi_taken * r / props
    if reward_model is None:
        r_hat1 = np.zeros(len(log))
    else:
        r_hat1 = cost.expected_reward_of_testing(reward_model.predict_proba(X))
    r_hat_taken = np.where(a == 1, r_hat1, 0.0)
    dr = pi1 * r_hat1 + pi_taken * (r - r_hat_taken) / props
    return OffPolicyEstimate(dr=float(dr.mean()), ips=float(ips.mean()))
