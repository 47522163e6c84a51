from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare

from helpers import cohort_of, person
from kitalloc.model import FeatureEncoder, RiskModel, UtilityConfig
from kitalloc.population import Gender, load_default_table
from kitalloc.sampling import weighted_sample_indices
from kitalloc.strategies.stratified import (
    JointDistribution, StratificationConfig, compute_weights, estimate_cohort_distribution,
    select_stratified, stratum_weights, target_distribution,
)

M, F = Gender.MALE, Gender.FEMALE
FLAT = UtilityConfig("uniform")
GENDER_ONLY = StratificationConfig(features=("gender",), smoothing="zero", utility=FLAT)
AGE_ONLY = StratificationConfig(features=("age_bin",), smoothing="zero", utility=FLAT)


def gender_cohort(n_male, n_female):
    return cohort_of([person(gender=M) for _ in range(n_male)] + [person(gender=F) for _ in range(n_female)])


def test_cohort_distribution_counts():
    c = cohort_of([person(age=10, gender=M) for _ in range(3)] + [person(age=10, gender=F)])
    d = estimate_cohort_distribution(c, ("gender", "age_bin"))
    assert d.probs == {(M, "<20"): 0.75, (F, "<20"): 0.25}
    assert sum(d.probs.values()) == pytest.approx(1.0)


def test_single_member_point_mass():
    assert estimate_cohort_distribution([person()], ("gender",)).probs == {(M,): 1.0}


def test_weights_follow_ratio():
    c = gender_cohort(8, 2)
    target = JointDistribution(("gender",), {(M,): 0.5, (F,): 0.5})
    w = compute_weights(c, target, estimate_cohort_distribution(c, ("gender",)), GENDER_ONLY)
    assert w[0].weight == pytest.approx(0.625)
    assert w[-1].weight == pytest.approx(2.5)


def test_identity_ratio():
    c = gender_cohort(6, 4)
    p = estimate_cohort_distribution(c, ("gender",))
    target = JointDistribution(("gender",), dict(p.probs))
    np.testing.assert_allclose(stratum_weights(c.members, target, p, GENDER_ONLY), 1.0)


def test_risk_utility_multiplies_ratio():
    enc = FeatureEncoder()
    weights = np.zeros(enc.dim)
    weights[enc.names.index("male")] = np.log(0.25)  # sigmoid(log(1/4)) = 0.2
    model = RiskModel(weights=weights, encoder=enc)
    cfg = StratificationConfig(features=("gender",), smoothing="zero", utility=UtilityConfig("risk"))
    c = gender_cohort(8, 2)
    target = JointDistribution(("gender",), {(M,): 0.5, (F,): 0.5})
    w = stratum_weights(c.members, target, estimate_cohort_distribution(c, ("gender",)), cfg, model)
    assert w[0] == pytest.approx(0.125)


def test_zero_target_probability_gives_zero_weight():
    c = gender_cohort(5, 5)
    target = JointDistribution(("gender",), {(M,): 1.0, (F,): 0.0})
    w = stratum_weights(c.members, target, estimate_cohort_distribution(c, ("gender",)), GENDER_ONLY)
    assert np.all(w[5:] == 0) and np.all(w[:5] == 2.0)


def test_additive_smoothing_by_hand():
    cfg = StratificationConfig(features=("gender",), smoothing="additive", lam=1.0, utility=FLAT)
    c = gender_cohort(8, 2)
    target = JointDistribution(("gender",), {(M,): 0.5, (F,): 0.5})
    w = stratum_weights(c.members, target, estimate_cohort_distribution(c, ("gender",)), cfg)
    # (10*0.5 + 1) / (8 + 1) and (10*0.5 + 1) / (2 + 1)
    assert w[0] == pytest.approx(6 / 9)
    assert w[-1] == pytest.approx(2.0)


def test_mismatched_strata():
    c = gender_cohort(2, 2)
    with pytest.raises(ValueError):
        stratum_weights(c.members, JointDistribution(("age_bin",), {("<20",): 1.0}),
                        estimate_cohort_distribution(c, ("gender",)), GENDER_ONLY)


def test_config_validation():
    with pytest.raises(ValueError):
        StratificationConfig(features=())
    with pytest.raises(ValueError):
        StratificationConfig(smoothing="additive", lam=0)
    with pytest.raises(ValueError):
        StratificationConfig(features=("shoe_size",))


def test_target_from_table_sums_to_one():
    d = target_distribution(load_default_table(), ("gender", "age_bin"))
    assert sum(d.probs.values()) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        target_distribution(load_default_table(), ("region",))


def test_whole_cohort_when_budget_large():
    c = gender_cohort(7, 3)
    res = select_stratified(c, 50, StratificationConfig(utility=FLAT), demo=load_default_table(), seed=1)
    assert sorted(res.ids) == sorted(c.ids)


def test_k1_corrects_age_skew():
    c = cohort_of([person(age=50) for _ in range(90)] + [person(age=70) for _ in range(10)])
    target = JointDistribution(("age_bin",), {("40-60",): 0.5, ("60-80",): 0.5})
    w = stratum_weights(c.members, target, estimate_cohort_distribution(c, ("age_bin",)), AGE_ONLY)
    rng = np.random.default_rng(0)
    hits = sum(c.members[weighted_sample_indices(w, 1, rng)[0]].age == 70 for _ in range(20_000))
    assert hits / 20_000 == pytest.approx(0.5, abs=0.02)


def test_uniform_reduction_matches_uniform_sampling():
    c = gender_cohort(5, 5)
    target = JointDistribution(("gender",), {(M,): 0.5, (F,): 0.5})
    counts = Counter()
    for s in range(20_000):
        counts.update(select_stratified(c, 1, GENDER_ONLY, target=target, seed=s).ids)
    obs = [counts[i] for i in c.ids]
    assert chisquare(obs).pvalue > 0.001


def test_utility_scale_invariance():
    c = gender_cohort(8, 2)
    p = estimate_cohort_distribution(c, ("gender",))
    target = JointDistribution(("gender",), {(M,): 0.3, (F,): 0.7})
    enc = FeatureEncoder()
    model = RiskModel(weights=np.arange(enc.dim) / 10.0, encoder=enc)
    cfg = StratificationConfig(features=("gender",), smoothing="zero", utility=UtilityConfig("risk"))
    w = stratum_weights(c.members, target, p, cfg, model)
    scaled = stratum_weights(c.members, target, p, cfg, model) * 7.0
    np.testing.assert_allclose(w / w.sum(), scaled / scaled.sum())
    assert select_stratified(c, 3, cfg, model=model, target=target, seed=2).ids == \
        [c.members[i].id for i in weighted_sample_indices(scaled, 3, 2)]


def test_risk_utility_without_model():
    c = gender_cohort(2, 2)
    with pytest.raises(ValueError, match="model"):
        select_stratified(c, 1, StratificationConfig(features=("gender",)), target=JointDistribution(
            ("gender",), {(M,): 0.5, (F,): 0.5}))
