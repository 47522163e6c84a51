"""Mini-pool (group) testing.

Two adaptive schemes are supported.  ``DORFMAN`` tests the pool and, if it
is positive, every member individually.  ``BINARY_SPLIT`` splits a positive
pool into halves of sizes ceil(n/2) and floor(n/2), tests both, and recurses
until singletons.  A pool of one is a single individual test under either
scheme.  Tests are assumed perfect.
"""
import enum
import math
from dataclasses import dataclass

from ._random import as_rng


class PoolStrategy(str, enum.Enum):
    DORFMAN = "dorfman"
    BINARY_SPLIT = "binary"


@dataclass(frozen=True)
class PoolPlan:
    size: int
    pools: tuple
    strategy: PoolStrategy = PoolStrategy.DORFMAN


def make_pools(selected, s=5, seed=None, strategy=PoolStrategy.DORFMAN):
    """Random partition of ``selected`` into ``ceil(n/s)`` pools."""
    if s < 1:
        raise ValueError("pool size must be at least 1")
    ids = list(selected)
    order = as_rng(seed).permutation(len(ids))
    shuffled = [ids[i] for i in order]
    pools = tuple(tuple(shuffled[i:i + s]) for i in range(0, len(shuffled), s))
    return PoolPlan(size=s, pools=pools, strategy=PoolStrategy(strategy))


def _binary(ids, result_of, labels):
    tests = 1
    if not any(result_of[i] for i in ids):
        labels.update({i: 0 for i in ids})
        return tests
    if len(ids) == 1:
        labels[ids[0]] = 1
        return tests
    half = math.ceil(len(ids) / 2)
    return tests + _binary(ids[:half], result_of, labels) + _binary(ids[half:], result_of, labels)


def resolve_pool(ids, oracle, strategy=PoolStrategy.DORFMAN):
    """Labels and number of tests for one pool.  ``oracle(id)`` returns the
    true 0/1 status."""
    ids = list(ids)
    if not ids:
        return {}, 0
    truth = {i: int(oracle(i)) for i in ids}
    labels = {}
    if PoolStrategy(strategy) is PoolStrategy.BINARY_SPLIT:
        return labels, _binary(ids, truth, labels)
    if len(ids) == 1 or not any(truth.values()):
        return {i: truth[i] for i in ids}, 1
    return dict(truth), 1 + len(ids)


def resolve_pools(plan, oracle):
    """Resolve every pool; returns ``(labels, tests_used)``."""
    labels, tests = {}, 0
    for pool in plan.pools:
        lab, t = resolve_pool(pool, oracle, plan.strategy)
        labels.update(lab)
        tests += t
    return labels, tests


def worst_case_tests(n, strategy=PoolStrategy.DORFMAN):
    """Most tests a pool of ``n`` can consume (every member positive)."""
    if n <= 1:
        return n
    if PoolStrategy(strategy) is PoolStrategy.DORFMAN:
        return n + 1
    half = math.ceil(n / 2)
    return 1 + worst_case_tests(half, strategy) + worst_case_tests(n - half, strategy)


def _tests_below(n, p):
    # A node is tested iff its parent tested positive, and a parent is
    # positive iff any of its members is; sum P(tested) over all nodes.
    if n <= 1:
        return 0.0
    half = math.ceil(n / 2)
    return 2.0 * (1.0 - (1.0 - p) ** n) + _tests_below(half, p) + _tests_below(n - half, p)


def expected_pool_tests(s, p, strategy=PoolStrategy.DORFMAN):
    """Expected tests for a pool of ``s`` people at prevalence ``p``."""
    if not 0 <= p <= 1:
        raise ValueError("prevalence must lie in [0, 1]")
    if s < 1:
        raise ValueError("pool size must be at least 1")
    if s == 1:
        return 1.0
    if PoolStrategy(strategy) is PoolStrategy.DORFMAN:
        return 1.0 + s * (1.0 - (1.0 - p) ** s)
    return 1.0 + _tests_below(s, p)


def expected_tests_per_person(s, p, strategy=PoolStrategy.DORFMAN):
    """Dorfman: ``1/s + 1 - (1-p)^s`` (1 for ``s == 1``); binary split by
    exact recursion over the split tree."""
    return expected_pool_tests(s, p, strategy) / s


def effective_budget(kits, s, p, strategy=PoolStrategy.DORFMAN):
    """People testable with ``kits`` in expectation (advisory, not a
    guarantee)."""
    if kits < 0:
        raise ValueError("kits must be non-negative")
    return int(math.floor(kits / expected_tests_per_person(s, p, strategy) + 1e-9))
