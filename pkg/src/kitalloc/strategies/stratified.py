"""Stratified, utility-weighted selection.

Each cohort member gets weight ``U(x) * P_target(s) / P_cohort(s)`` where
``s`` is the member's stratum over the selected features, so that strata
rare in the cohort relative to the reference population are favoured.
"""
import enum
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..model import UtilityConfig, utilities
from ..population import COARSE_BINS, GENDERS, Gender, age_bin
from ..sampling import WeightedCandidate, weighted_sample_indices
from ..selection import SelectionResult

FEATURE_GETTERS = {
    "age_bin": lambda ind: age_bin(ind.age),
    "gender": lambda ind: Gender(ind.gender),
    "region": lambda ind: ind.region,
    "comorbidity": lambda ind: bool(ind.comorbidity),
}


class Smoothing(str, enum.Enum):
    ZERO_OUT = "zero"
    ADDITIVE = "additive"


@dataclass(frozen=True)
class StratificationConfig:
    features: tuple = ("gender", "age_bin")
    smoothing: Smoothing = Smoothing.ADDITIVE
    lam: float = 0.5
    utility: UtilityConfig = field(default_factory=UtilityConfig)

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "smoothing", Smoothing(self.smoothing))
        if not self.features:
            raise ValueError("at least one stratification feature is required")
        unknown = set(self.features) - set(FEATURE_GETTERS)
        if unknown:
            raise ValueError(f"unknown stratification feature(s): {sorted(unknown)}")
        if self.smoothing is Smoothing.ADDITIVE and not self.lam > 0:
            raise ValueError("additive smoothing needs lam > 0")


@dataclass(frozen=True)
class JointDistribution:
    """Probabilities over strata (tuples ordered like ``features``).

    ``n`` is the sample size behind an empirical distribution, if any.
    """

    features: tuple
    probs: dict
    source: str = "population"
    n: int | None = None

    def __post_init__(self):
        total = sum(self.probs.values())
        if any(p < 0 for p in self.probs.values()) or abs(total - 1.0) > 1e-9:
            raise ValueError("stratum probabilities must be non-negative and sum to 1")

    def __getitem__(self, stratum):
        return self.probs.get(stratum, 0.0)


def stratum_of(individual, features):
    return tuple(FEATURE_GETTERS[f](individual) for f in features)


def estimate_cohort_distribution(cohort, features):
    """Empirical stratum frequencies of the cohort members."""
    members = getattr(cohort, "members", cohort)
    if not members:
        raise ValueError("cohort is empty")
    features = tuple(features)
    counts = Counter(stratum_of(m, features) for m in members)
    n = len(members)
    return JointDistribution(features, {s: c / n for s, c in counts.items()}, source="cohort", n=n)


def target_distribution(demo, features=("gender", "age_bin"), region=None):
    """Reference distribution over gender and/or age bin from a
    demographic table.  Other features need an explicit distribution."""
    features = tuple(features)
    if not features or not set(features) <= {"gender", "age_bin"}:
        raise ValueError("reference tables only cover 'gender' and 'age_bin'; pass an explicit target")
    joint = demo.joint(region)
    probs = {}
    for b in COARSE_BINS:
        for g in GENDERS:
            key = tuple(g if f == "gender" else b for f in features)
            probs[key] = probs.get(key, 0.0) + joint[(b, g)]
    return JointDistribution(features, probs, source="population")


def _ratios(strata, p_all, p_cohort, cfg, n):
    if cfg.smoothing is Smoothing.ZERO_OUT:
        out = {}
        for s in strata:
            den = p_cohort[s]
            out[s] = p_all[s] / den if den > 0 else 0.0
        return out
    space = set(p_all.probs) | set(p_cohort.probs)
    norm = n + cfg.lam * len(space)
    return {s: ((n * p_all[s] + cfg.lam) / norm) / ((n * p_cohort[s] + cfg.lam) / norm) for s in strata}


def stratum_weights(members, p_all, p_cohort, cfg, model=None):
    """Array of selection weights aligned with ``members``."""
    if tuple(p_all.features) != tuple(p_cohort.features) or tuple(p_all.features) != cfg.features:
        raise ValueError("target and cohort distributions are over different strata")
    strata = [stratum_of(m, cfg.features) for m in members]
    n = p_cohort.n if p_cohort.n is not None else len(members)
    ratio = _ratios(set(strata), p_all, p_cohort, cfg, n)
    u = utilities(cfg.utility, model, members)
    return u * np.array([ratio[s] for s in strata])


def compute_weights(cohort, p_all, p_cohort, cfg, model=None):
    members = getattr(cohort, "members", cohort)
    w = stratum_weights(members, p_all, p_cohort, cfg, model)
    return [WeightedCandidate(m.id, float(x)) for m, x in zip(members, w)]


def select_stratified(cohort, k, cfg, demo=None, model=None, seed=None, *, target=None, region=None):
    """Weighted sample of ``k`` cohort members.

    The reference distribution is ``target`` when given, otherwise it is
    built from ``demo`` (nation, or ``region`` when set).
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    members = cohort.members
    if target is None:
        target = target_distribution(demo, cfg.features, region)
    p_cohort = estimate_cohort_distribution(members, cfg.features)
    w = stratum_weights(members, target, p_cohort, cfg, model)
    idx = weighted_sample_indices(w, k, seed)
    total = w.sum()
    ids = [members[i].id for i in idx]
    weights = {members[i].id: float(w[i]) for i in idx}
    props = {members[i].id: min(1.0, k * float(w[i]) / total) for i in idx}
    return SelectionResult(day=cohort.day, ids=ids, strategy="stratified",
                           weights=weights, propensities=props, budgeted=k > 1)
