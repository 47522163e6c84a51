"""Randomisation across the four symptom x history buckets."""
import enum
import math
from dataclasses import dataclass

import numpy as np

from .._random import as_rng
from ..selection import SelectionResult


class Bucket(enum.IntEnum):
    X1 = 1  # symptomatic, risky history
    X2 = 2  # asymptomatic, risky history
    X3 = 3  # symptomatic, no risky history
    X4 = 4  # asymptomatic, no risky history


def assign_bucket(individual):
    if individual.risky_history:
        return Bucket.X1 if individual.symptomatic else Bucket.X2
    return Bucket.X3 if individual.symptomatic else Bucket.X4


def largest_remainder(total, fractions):
    """Integer apportionment of ``total`` by ``fractions`` (ties to the
    earlier entry)."""
    fractions = np.asarray(fractions, dtype=float)
    if total <= 0 or fractions.sum() <= 0:
        return [0] * len(fractions)
    raw = total * fractions / fractions.sum()
    base = np.floor(raw).astype(int)
    rem = raw - base
    order = sorted(range(len(rem)), key=lambda i: (-rem[i], i))
    for i in order[: total - int(base.sum())]:
        base[i] += 1
    return [int(b) for b in base]


@dataclass(frozen=True)
class BucketBudget:
    k1: int
    k2: int
    k3: int
    k4: int

    def __post_init__(self):
        if min(self.as_list()) < 0:
            raise ValueError("bucket budgets must be non-negative")

    @classmethod
    def from_split(cls, total, split=(0.4, 0.3, 0.2, 0.1)):
        if len(split) != 4 or min(split) < 0 or not math.isclose(sum(split), 1.0, abs_tol=1e-9):
            raise ValueError("split must be four non-negative fractions summing to 1")
        return cls(*largest_remainder(total, split))

    def as_list(self):
        return [self.k1, self.k2, self.k3, self.k4]

    @property
    def total(self):
        return sum(self.as_list())


def _fill(budgets, sizes):
    """Per-bucket take counts.  Budget a bucket cannot use moves to buckets
    that still have members, in proportion to their budgets."""
    budgets = list(budgets)
    take = [min(b, s) for b, s in zip(budgets, sizes)]
    surplus = sum(budgets) - sum(take)
    while surplus > 0:
        targets = [j for j in range(4) if take[j] < sizes[j] and budgets[j] > 0]
        if not targets:
            break
        extra = largest_remainder(surplus, [budgets[j] if j in targets else 0 for j in range(4)])
        moved = 0
        for j in targets:
            add = min(extra[j], sizes[j] - take[j])
            take[j] += add
            moved += add
        if moved == 0:
            break
        surplus -= moved
    return take


def select_bucket(cohort, budget, mandatory_x1=False, seed=None, k_total=None):
    """Uniform sampling inside each bucket under per-bucket budgets.

    With ``mandatory_x1`` every member of X1 is selected first and the
    remaining budget ``max(K - |X1|, 0)`` is re-split with the same
    fractions.  ``k_total``, when given, must equal the budget total.
    """
    total = budget.total
    if k_total is not None and k_total != total:
        raise ValueError(f"bucket budgets sum to {total}, expected {k_total}")
    rng = as_rng(seed)
    groups = {b: [] for b in Bucket}
    for m in cohort.members:
        groups[assign_bucket(m)].append(m.id)

    ids, props, overflow = [], {}, set()
    budgets = budget.as_list()
    if mandatory_x1:
        x1 = groups[Bucket.X1]
        ids.extend(x1)
        # X1 members beyond the budget are tested outside it
        overflow = set(x1[total:])
        props.update({i: 1.0 for i in x1})
        remaining = max(total - len(x1), 0)
        budgets = largest_remainder(remaining, budgets) if total > 0 else [0, 0, 0, 0]
        groups[Bucket.X1] = []

    sizes = [len(groups[b]) for b in Bucket]
    take = _fill(budgets, sizes)
    for b, k in zip(Bucket, take):
        members = groups[b]
        if k == 0:
            continue
        chosen = rng.permutation(len(members))[:k]
        ids.extend(members[i] for i in chosen)
        props.update({members[i]: k / len(members) for i in chosen})

    return SelectionResult(
        day=getattr(cohort, "day", 0), ids=ids, strategy="bucket",
        weights=dict(props), propensities=props, mandatory=overflow,
    )
