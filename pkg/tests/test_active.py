import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import cohort_of, person
from kitalloc.model import FeatureEncoder, LabeledObservation, RiskModel, binary_entropy, sgd_fit
from kitalloc.sampling import weighted_sample_indices
from kitalloc.strategies.active import (
    Committee, disagreement, disagreement_weights, retrain_committee, select_disagreement,
    select_uncertainty, uncertainty_weights,
)

ENC = FeatureEncoder()
AGE = ENC.names.index("age")


def logit(p):
    return np.log(p / (1 - p))


def age_model(intercept, slope):
    """Risk model depending on age only: logit p = intercept + slope * age / 100."""
    w = np.zeros(ENC.dim)
    w[AGE] = slope
    return RiskModel(weights=w, intercept=intercept, encoder=ENC)


def people_with_risk(ps):
    """Individuals aged 0, 100, ... with a model reproducing ``ps`` exactly
    for two of them: age 0 gets ps[0], age 100 gets ps[1]."""
    return age_model(logit(ps[0]), logit(ps[1]) - logit(ps[0])), [person(age=0), person(age=100)]


class TestUncertainty:
    def test_half_has_largest_weight(self):
        # the model is linear in age, so pick ages giving 0.01, 0.5 and 0.99
        model = age_model(logit(0.01), 2 * (logit(0.5) - logit(0.01)))
        members = [person(age=0), person(age=50), person(age=100)]
        np.testing.assert_allclose(model.predict_proba(members), [0.01, 0.5, 0.99], atol=1e-12)
        w = uncertainty_weights(model, members)
        assert np.argmax(w) == 1

    def test_untrained_model_is_uniform(self):
        c = cohort_of([person(age=a) for a in range(0, 100, 10)])
        w = uncertainty_weights(RiskModel.zeros(encoder=ENC), c.members)
        np.testing.assert_allclose(w, 1.0)

    def test_frequency_ratio_matches_entropy(self):
        model, members = people_with_risk([0.5, 0.25])
        w = uncertainty_weights(model, members)
        np.testing.assert_allclose(w, [1.0, 0.8112781244591328], atol=1e-12)
        c = cohort_of(members)
        rng = np.random.default_rng(0)
        first = sum(select_uncertainty(model, c, 1, seed=rng).ids[0] == members[0].id for _ in range(20_000))
        expected = 1 / (1 + binary_entropy(0.25))
        assert first / 20_000 == pytest.approx(expected, abs=0.01)

    def test_budget_and_empty_cohort(self):
        c = cohort_of([person(age=a) for a in range(20)])
        assert len(select_uncertainty(RiskModel.zeros(encoder=ENC), c, 5, seed=1)) == 5
        assert select_uncertainty(RiskModel.zeros(encoder=ENC), cohort_of([]), 5).ids == []


class TestDisagreement:
    def test_identical_members(self):
        m = age_model(-1.0, 2.0)
        c = cohort_of([person(age=a) for a in range(0, 100, 10)])
        com = Committee((m, m, m))
        np.testing.assert_array_equal(disagreement(com, c.members), 0.0)
        np.testing.assert_allclose(disagreement_weights(com, c.members, 1e-3), 1e-3)

    def test_variance_arithmetic(self):
        # member A: p(age 0)=0.1, p(age 100)=0.5 ; member B: p(age 0)=0.9, p(age 100)=0.5
        a = age_model(logit(0.1), logit(0.5) - logit(0.1))
        b = age_model(logit(0.9), logit(0.5) - logit(0.9))
        x1, x2 = person(age=0), person(age=100)
        w = disagreement_weights(Committee((a, b)), [x1, x2], lambda_d=1e-3)
        np.testing.assert_allclose(w, [0.16 + 1e-3, 1e-3], atol=1e-12)

    def test_duplicate_member_variance(self):
        rng = np.random.default_rng(4)
        models = [age_model(rng.normal(), rng.normal()) for _ in range(3)]
        members = [person(age=a) for a in (10, 40, 80)]
        com4 = Committee(tuple(models) + (models[0],))
        preds = np.vstack([m.predict_proba(members) for m in models + [models[0]]])
        # population variance computed directly from its definition
        mean = preds.sum(axis=0) / 4
        oracle = ((preds - mean) ** 2).sum(axis=0) / 4
        np.testing.assert_allclose(disagreement(com4, members), oracle, atol=1e-15)

    @given(st.lists(st.floats(-5, 5), min_size=4, max_size=4))
    @settings(max_examples=50, deadline=None)
    def test_zero_iff_identical(self, params):
        a, b = age_model(params[0], params[1]), age_model(params[2], params[3])
        x = [person(age=0), person(age=100)]
        pa, pb = a.predict_proba(x), b.predict_proba(x)
        d = disagreement(Committee((a, b)), x)
        assert np.array_equal(d == 0, pa == pb)

    def test_committee_errors(self):
        with pytest.raises(ValueError):
            Committee((RiskModel.zeros(encoder=ENC),))
        with pytest.raises(ValueError):
            Committee((RiskModel.zeros(3), RiskModel.zeros(4)))
        with pytest.raises(ValueError):
            select_disagreement([RiskModel.zeros(encoder=ENC)], cohort_of([person()]), 1)

    def test_budget(self):
        c = cohort_of([person(age=a) for a in range(30)])
        com = Committee((age_model(0, 1), age_model(0, -1)))
        res = select_disagreement(com, c, 7, seed=0)
        assert len(res) == 7 and len(set(res.ids)) == 7


def _pool(n, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 4))
    y = (rng.random(n) < 1 / (1 + np.exp(-(X @ [1.0, -0.5, 0.3, 0.0] - 1)))).astype(int)
    return [LabeledObservation(x=x, y=int(t)) for x, t in zip(X, y)], X, y


class TestRetrain:
    def test_single_point_pool(self):
        pool = [LabeledObservation(x=np.array([1.0, 0.0]), y=1)]
        com = retrain_committee(pool, m=2, seed=0)
        assert len(com) == 2
        np.testing.assert_allclose(com.members[0].weights, com.members[1].weights)

    def test_deterministic(self):
        pool, _, _ = _pool(50, 1)
        a, b = retrain_committee(pool, m=3, seed=7), retrain_committee(pool, m=3, seed=7)
        for ma, mb in zip(a.members, b.members):
            np.testing.assert_array_equal(ma.weights, mb.weights)

    def test_bagged_mean_near_single_model(self):
        pool, X, y = _pool(1000, 2)
        # a small step lets each member settle near its optimum; at large
        # constant steps the last-iterate noise swamps the bagging effect
        com = retrain_committee(pool, m=20, seed=3, epochs=30, learning_rate=0.01)
        single = sgd_fit(RiskModel.zeros(4, learning_rate=0.01), X, y, epochs=30, seed=3)
        gap = np.abs(com.predictions(X).mean(axis=0) - single.predict_proba(X))
        assert gap.max() < 0.05

    def test_errors(self):
        with pytest.raises(ValueError):
            retrain_committee([], m=3)
        with pytest.raises(ValueError):
            retrain_committee(_pool(5, 0)[0], m=1)


def test_uncertainty_sampling_matches_direct_weighted_draw():
    model = age_model(-2.0, 3.0)
    c = cohort_of([person(age=a) for a in range(0, 100, 7)])
    w = binary_entropy(model.predict_proba(c.members))
    expected = [c.members[i].id for i in weighted_sample_indices(w, 4, 11)]
    assert select_uncertainty(model, c, 4, seed=11).ids == expected
