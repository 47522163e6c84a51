"""Deterministic day-loop simulator, paired strategy comparison and report
output.

Each simulated day runs, in order: update models with labels that have
become visible, draw the day's cohort, select people (offline sampling or
the online gate), test them, and record metrics.  Labels from day ``i`` are
visible from day ``i + label_delay`` (one day by default).  All randomness
comes from sub-seeds hashed from the master seed and a purpose tag, so
strategies run on the same seed see identical populations and cohorts.
"""
import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np
from scipy.stats import rankdata

from ._random import as_rng, derive_seed
from .config import SimulationConfig, config_to_mapping
from .model import FeatureEncoder, LabeledObservation, RiskModel, UtilityConfig, update
from .online import Decision, decide_online, open_day
from .pooling import PoolStrategy, effective_budget, make_pools, resolve_pool, worst_case_tests
from .population import (
    ArrivalModel, InfectionOracle, draw_daily_cohort, generate_population, load_default_table,
)
from .selection import SelectionResult
from .strategies.active import disagreement_weights, retrain_committee, uncertainty_weights
from .strategies.bandit import BanditPolicy, CostConfig, bandit_select, bandit_update
from .strategies.bucket import Bucket, BucketBudget, assign_bucket, select_bucket
from .strategies.stratified import (
    StratificationConfig, estimate_cohort_distribution, select_stratified, stratum_of, stratum_weights,
    target_distribution,
)
from .sampling import weighted_sample_indices


@dataclass
class DayRecord:
    day: int
    cohort_size: int = 0
    kits_budgeted: int = 0
    people_budgeted: int = 0
    selected: int = 0
    kits_used: int = 0
    mandatory_overflow: int = 0
    deferred: int = 0
    positives_found: int = 0
    cumulative_positives_found: int = 0
    cumulative_positives_present: int = 0
    recall: float | None = None
    cohort_positivity: float | None = None
    test_positivity: float | None = None
    tv_divergence: float | None = None
    probe_log_loss: float | None = None
    probe_auc: float | None = None
    pool_tests_used: int | None = None


REPORT_FIELDS = tuple(f.name for f in fields(DayRecord))


@dataclass
class SimulationReport:
    rows: list = field(default_factory=list)
    strategy: str = ""
    mode: str = "offline"
    seed: int = 0

    @property
    def summary(self):
        kits = sum(r.kits_used for r in self.rows)
        found = sum(r.positives_found for r in self.rows)
        tvs = [r.tv_divergence for r in self.rows if r.tv_divergence is not None]
        last = self.rows[-1] if self.rows else None
        return {
            "strategy": self.strategy,
            "mode": self.mode,
            "seed": self.seed,
            "days": len(self.rows),
            "kits_used": kits,
            "positives_found": found,
            "positives_per_kit": found / kits if kits else 0.0,
            "final_recall": last.recall if last else None,
            "mean_tv_divergence": float(np.mean(tvs)) if tvs else None,
            "final_probe_log_loss": last.probe_log_loss if last else None,
            "final_probe_auc": last.probe_auc if last else None,
            "budget_note": "pooled people budgets are expectation-based (advisory)",
        }


def total_variation(p, q):
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def auc_score(y, score):
    """Probability a random positive outranks a random negative (ties 1/2)."""
    y = np.asarray(y)
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(score)
    return float((ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def _log_loss(y, p):
    p = np.clip(p, 1e-15, 1 - 1e-15)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))


def _round(x, nd=12):
    return None if x is None else float(round(x, nd))


class Simulation:
    """One simulated run.  Call :meth:`run` once.

    ``trace``, when a list, receives one ``{"event", "day", "label_days"}``
    dict per model update and per scoring pass; ``label_days`` lists the
    selection days of every label the scoring models have consumed.
    """

    def __init__(self, cfg, trace=None):
        self.cfg = cfg
        self.trace = trace
        seed = cfg.seed
        self.demo = load_default_table()
        self.encoder = FeatureEncoder(regions=tuple(self.demo.states))
        self.population = generate_population(
            cfg.population_size, self.demo, cfg.truth, derive_seed(seed, "population"),
            traits=cfg.traits, region=cfg.region)
        self.by_id = {p.id: p for p in self.population}
        probe = generate_population(
            cfg.probe_size, self.demo, cfg.truth, derive_seed(seed, "probe"),
            traits=cfg.traits, region=cfg.region, id_offset=cfg.population_size)
        audit = InfectionOracle()
        audit.authorize(p.id for p in probe)
        self.probe_X = self.encoder.encode_many(probe)
        self.probe_y = np.array([audit(p) for p in probe], dtype=float)
        self.arrival = ArrivalModel(cfg.cohort_size, tuple(cfg.slot_probs), cfg.symptomatic_bias)
        self.census = target_distribution(self.demo, ("gender", "age_bin"), cfg.region)
        self.strat_cfg = StratificationConfig(
            features=cfg.strat.features, smoothing=cfg.strat.smoothing, lam=cfg.strat.lam,
            utility=UtilityConfig(cfg.strat.utility))
        self.strat_target = target_distribution(self.demo, self.strat_cfg.features, cfg.region)
        self.cost = CostConfig(cfg.bandit.reward_tp, cfg.bandit.cost_fp)

        self.oracle = InfectionOracle()
        # evaluation-only view of the ground truth (recall denominators)
        self._audit = InfectionOracle()
        self._audit.authorize(self.by_id)

        self.model = RiskModel.zeros(encoder=self.encoder, learning_rate=cfg.learning_rate)
        self.policy = BanditPolicy(self.model, cfg.bandit.epsilon, cfg.bandit.temperature)
        self.committee = None
        self.pending = []
        self.labelled = []
        self.arrived = set()
        self.prev_cohort = None
        self.prev_scores = None
        self.selected_strata = {}
        self.n_selected = 0
        self.found = 0
        self.present = 0
        self.tested_pos = 0
        self.tested = 0
        self.report = SimulationReport(strategy=cfg.strategy, mode=cfg.mode, seed=cfg.seed)

    # -- bookkeeping -------------------------------------------------------

    def _seed(self, day, tag):
        return derive_seed(self.cfg.seed, day, tag)

    def _consumed_label_days(self):
        days = set(self.model.label_days) | set(self.policy.model.label_days)
        if self.committee is not None:
            days |= self._committee_days
        return sorted(days)

    def _log(self, event, day, label_days):
        if self.trace is not None:
            self.trace.append({"event": event, "day": day, "label_days": list(label_days)})

    # -- day steps ---------------------------------------------------------

    def run(self):
        for day in range(1, self.cfg.days + 1):
            self.step(day)
        return self.report

    def step(self, day):
        self.update(day)
        cohort = self.arrivals(day)
        if cohort is None:
            self.report.rows.append(self._empty_row(day))
            return
        selection = self.select(day, cohort)
        outcome = self.test(day, cohort, selection)
        self.record(day, cohort, selection, outcome)
        self.prev_cohort = cohort

    def update(self, day):
        visible = [o for o in self.pending if o.visible_on_day <= day]
        if not visible:
            return
        self.pending = [o for o in self.pending if o.visible_on_day > day]
        self.model = update(self.model, visible, seed=self._seed(day, "model"))
        self.policy = bandit_update(self.policy, visible, self.cost, seed=self._seed(day, "bandit"))
        self.labelled.extend(visible)
        if self.cfg.strategy == "active_disagreement":
            self.committee = retrain_committee(
                self.labelled, self.cfg.active.committee_size, self._seed(day, "committee"),
                epochs=self.cfg.active.epochs, learning_rate=self.cfg.learning_rate, encoder=self.encoder)
            self._committee_days = {o.day for o in self.labelled}
        self._log("update", day, sorted({o.day for o in visible}))

    def arrivals(self, day):
        cohort = draw_daily_cohort(self.population, day, self.arrival, self._seed(day, "cohort"),
                                   exclude=self.arrived)
        if cohort is not None:
            self.arrived.update(cohort.ids)
        return cohort

    def people_budget(self, kits):
        pool = self.cfg.pooling
        if not pool.enabled:
            return kits
        prevalence = self.tested_pos / self.tested if self.tested else pool.prevalence
        return effective_budget(kits, pool.size, prevalence, pool.strategy)

    def _active_strategy(self, day):
        s = self.cfg.strategy
        if s == "bandit" and day <= self.cfg.bandit.bootstrap_days:
            return "stratified"
        return s

    def weights(self, day, cohort, reference):
        """Per-member weights of the active strategy, aligned with
        ``cohort.members``.  ``reference`` supplies the cohort distribution
        (today's cohort offline, yesterday's online)."""
        members = cohort.members
        s = self._active_strategy(day)
        if s == "uniform":
            return np.ones(len(members))
        if s == "bucket":
            counts = {b: 1.0 for b in Bucket}
            if reference is not None:
                for m in reference.members:
                    counts[assign_bucket(m)] += 1
            n = sum(counts.values())
            split = dict(zip(Bucket, self.cfg.bucket.split))
            return np.array([split[assign_bucket(m)] * n / counts[assign_bucket(m)] for m in members])
        if s == "stratified":
            if reference is None:
                return np.ones(len(members))
            p_ref = estimate_cohort_distribution(reference, self.strat_cfg.features)
            return stratum_weights(members, self.strat_target, p_ref, self.strat_cfg, self.model)
        if s == "bandit":
            return self.policy.prob_test(members)
        if s == "active_uncertainty":
            return uncertainty_weights(self.model, members)
        if self.committee is None:
            return np.ones(len(members))
        return disagreement_weights(self.committee, members, self.cfg.active.lambda_d)

    def select(self, day, cohort):
        kits = self.cfg.budget_on(day)
        k = self.people_budget(kits)
        self._log("score", day, self._consumed_label_days())
        if self.cfg.mode == "online":
            return self._select_online(day, cohort, k)
        seed = self._seed(day, "select")
        s = self._active_strategy(day)
        if s == "bucket":
            budget = BucketBudget.from_split(k, self.cfg.bucket.split)
            sel = select_bucket(cohort, budget, self.cfg.bucket.mandatory_x1, seed)
        elif s == "stratified":
            sel = select_stratified(cohort, k, self.strat_cfg, model=self.model, seed=seed,
                                    target=self.strat_target)
        elif s == "bandit":
            sel = bandit_select(self.policy, cohort, k, seed, self.cfg.bandit.calibrate_budget)
        else:
            w = self.weights(day, cohort, cohort)
            idx = weighted_sample_indices(w, k, seed)
            total = float(w.sum())
            members = cohort.members
            sel = SelectionResult(
                day=day, ids=[members[i].id for i in idx], strategy=s,
                weights={members[i].id: float(w[i]) for i in idx},
                propensities={members[i].id: min(1.0, k * float(w[i]) / total) for i in idx},
                budgeted=k > 1)
        sel.strategy = self.cfg.strategy
        return sel

    def _select_online(self, day, cohort, k):
        members = cohort.members
        w = self.weights(day, cohort, self.prev_cohort)
        if self.cfg.online_score == "key":
            rng = as_rng(self._seed(day, "online-keys"))
            e = rng.standard_exponential(len(members))
            with np.errstate(divide="ignore"):
                score = np.where(w > 0, -e / np.where(w > 0, w, 1.0), -np.inf)
        else:
            score = w
        scores = {m.id: float(s) for m, s in zip(members, score)}
        states = open_day(day, k, self.prev_cohort, self.prev_scores)
        forced = set()
        if self._active_strategy(day) == "bucket" and self.cfg.bucket.mandatory_x1:
            forced = {m.id for m in members if assign_bucket(m) is Bucket.X1}
        ids, overflow = [], set()
        rng = as_rng(self._seed(day, "online-order"))
        by_slot = [[] for _ in states]
        for m in members:
            by_slot[cohort.slot_of[m.id]].append(m)
        for t, arrivals in enumerate(by_slot):
            for i in rng.permutation(len(arrivals)):
                m = arrivals[i]
                if m.id in forced:
                    if states[t].accepted_so_far < states[t].cap:
                        states[t].accepted_so_far += 1
                    else:
                        overflow.add(m.id)
                    ids.append(m.id)
                elif decide_online(states[t], m, scores[m.id]) is Decision.RECOMMEND:
                    ids.append(m.id)
        self.prev_scores = scores
        total = float(w.sum()) or 1.0
        wmap = dict(zip((m.id for m in members), w))
        return SelectionResult(
            day=day, ids=ids, strategy=self.cfg.strategy,
            weights={i: float(wmap[i]) for i in ids},
            propensities={i: 1.0 if i in forced else min(1.0, max(k * float(wmap[i]) / total, 1e-12))
                          for i in ids},
            mandatory=overflow, budgeted=True)

    def test(self, day, cohort, selection):
        """Run the tests; returns ``(labels, kits_used, deferred)``."""
        ids = selection.ids
        self.oracle.authorize(ids)
        kits = self.cfg.budget_on(day) + len(selection.mandatory)
        if not self.cfg.pooling.enabled:
            return {i: self.oracle(self.by_id[i]) for i in ids}, len(ids), 0
        pool = self.cfg.pooling
        plan = make_pools(ids, pool.size, self._seed(day, "pools"), pool.strategy)
        lookup = lambda i: self.oracle(self.by_id[i])  # noqa: E731
        labels, used, deferred = {}, 0, 0
        for members in plan.pools:
            remaining = kits - used
            if worst_case_tests(len(members), pool.strategy) <= remaining:
                lab, t = resolve_pool(members, lookup, PoolStrategy(pool.strategy))
                labels.update(lab)
                used += t
                continue
            # not enough kits to risk the pool: test individually while possible
            for i in members:
                if used < kits:
                    labels[i] = lookup(i)
                    used += 1
                else:
                    deferred += 1
        return labels, used, deferred

    def record(self, day, cohort, selection, outcome):
        labels, kits_used, deferred = outcome
        for i, y in labels.items():
            ind = self.by_id[i]
            self.pending.append(LabeledObservation(
                x=self.encoder.encode(ind), y=int(y), a=1,
                propensity=max(float(selection.propensities.get(i, 1.0)), 1e-12),
                day=day, visible_on_day=day + self.cfg.label_delay, id=i, budgeted=selection.budgeted))
            s = stratum_of(ind, ("gender", "age_bin"))
            self.selected_strata[s] = self.selected_strata.get(s, 0) + 1
        self.n_selected += len(labels)
        positives = int(sum(labels.values()))
        present = sum(self._audit(m) for m in cohort.members)
        self.found += positives
        self.present += present
        self.tested += len(labels)
        self.tested_pos += positives
        kits = self.cfg.budget_on(day)
        p = self.model.predict_proba(self.probe_X)
        tv = None
        if self.n_selected:
            freq = {s: c / self.n_selected for s, c in self.selected_strata.items()}
            tv = total_variation(freq, self.census.probs)
        self.report.rows.append(DayRecord(
            day=day,
            cohort_size=len(cohort),
            kits_budgeted=kits,
            people_budgeted=self.people_budget(kits),
            selected=len(selection.ids),
            kits_used=kits_used,
            mandatory_overflow=len(selection.mandatory),
            deferred=deferred,
            positives_found=positives,
            cumulative_positives_found=self.found,
            cumulative_positives_present=self.present,
            recall=_round(self.found / self.present) if self.present else None,
            cohort_positivity=_round(present / len(cohort)),
            test_positivity=_round(positives / len(labels)) if labels else None,
            tv_divergence=_round(tv),
            probe_log_loss=_round(_log_loss(self.probe_y, p)),
            probe_auc=_round(auc_score(self.probe_y, p)),
            pool_tests_used=kits_used if self.cfg.pooling.enabled else None,
        ))

    def _empty_row(self, day):
        kits = self.cfg.budget_on(day)
        p = self.model.predict_proba(self.probe_X)
        return DayRecord(
            day=day, kits_budgeted=kits, people_budgeted=self.people_budget(kits),
            cumulative_positives_found=self.found, cumulative_positives_present=self.present,
            recall=_round(self.found / self.present) if self.present else None,
            probe_log_loss=_round(_log_loss(self.probe_y, p)),
            probe_auc=_round(auc_score(self.probe_y, p)),
            pool_tests_used=0 if self.cfg.pooling.enabled else None,
        )


def run_simulation(cfg, trace=None):
    """Simulate ``cfg.days`` days and return the per-day report."""
    if not isinstance(cfg, SimulationConfig):
        raise TypeError("cfg must be a SimulationConfig")
    return Simulation(cfg, trace).run()


def delay_violations(trace):
    """Scoring events that read a label produced on the same day or later."""
    return [e for e in trace if e["event"] == "score" and any(d >= e["day"] for d in e["label_days"])]


# -- paired comparison -------------------------------------------------------

METRICS = ("final_recall", "mean_tv_divergence", "positives_per_kit")


@dataclass
class ComparisonTable:
    strategies: list
    replicates: int
    values: dict  # strategy -> metric -> list over replicates

    def mean(self, strategy, metric):
        return float(np.mean(self.values[strategy][metric]))

    def stderr(self, strategy, metric):
        v = np.asarray(self.values[strategy][metric], dtype=float)
        return float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0

    def paired_difference(self, a, b, metric):
        """Mean and standard error of ``a - b`` over paired replicates."""
        d = np.asarray(self.values[a][metric], float) - np.asarray(self.values[b][metric], float)
        se = float(d.std(ddof=1) / math.sqrt(d.size)) if d.size > 1 else 0.0
        return float(d.mean()), se

    def rows(self):
        out = []
        for s in self.strategies:
            row = {"strategy": s}
            for m in METRICS:
                row[m] = self.mean(s, m)
                row[f"{m}_stderr"] = self.stderr(s, m)
            out.append(row)
        return out

    def format(self):
        lines = [f"{'strategy':<22}" + "".join(f"{m:>30}" for m in METRICS)]
        for row in self.rows():
            cells = "".join(f"{row[m]:>19.4f} +/- {row[m + '_stderr']:<7.4f}" for m in METRICS)
            lines.append(f"{row['strategy']:<22}{cells}")
        return "\n".join(lines)


def _replicate_metrics(cfg):
    s = run_simulation(cfg).summary
    return {
        "final_recall": s["final_recall"] if s["final_recall"] is not None else float("nan"),
        "mean_tv_divergence": s["mean_tv_divergence"] if s["mean_tv_divergence"] is not None else float("nan"),
        "positives_per_kit": s["positives_per_kit"],
    }


def compare_strategies(cfg, strategies, replicates=10, workers=1):
    """Run each strategy on ``replicates`` paired seeds.

    Replicate ``r`` uses the same derived master seed for every strategy, so
    populations, probes and cohorts coincide across strategies.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    strategies = list(strategies)
    if len(set(strategies)) != len(strategies):
        raise ValueError("strategies must be distinct")
    jobs = [replace(cfg, strategy=s, seed=derive_seed(cfg.seed, "replicate", r))
            for r in range(replicates) for s in strategies]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_replicate_metrics, jobs))
    else:
        results = [_replicate_metrics(j) for j in jobs]
    values = {s: {m: [] for m in METRICS} for s in strategies}
    for job, res in zip(jobs, results):
        for m in METRICS:
            values[job.strategy][m].append(res[m])
    return ComparisonTable(strategies, replicates, values)


# -- report output -----------------------------------------------------------

def report_to_dict(report):
    return {"days": [asdict(r) for r in report.rows], "summary": report.summary}


def report_from_dict(data):
    s = data["summary"]
    rows = [DayRecord(**r) for r in data["days"]]
    return SimulationReport(rows=rows, strategy=s["strategy"], mode=s["mode"], seed=s["seed"])


def emit_report(report, fmt, path):
    """Write ``report`` as CSV (one row per day) or JSON (day objects plus a
    summary)."""
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(REPORT_FIELDS)
            for r in report.rows:
                w.writerow(["" if v is None else repr(v) if isinstance(v, float) else v
                            for v in (getattr(r, f) for f in REPORT_FIELDS)])
    elif fmt == "json":
        with open(path, "w") as fh:
            json.dump(report_to_dict(report), fh, indent=2)
            fh.write("\n")
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    return path


def load_report(path):
    with open(path) as fh:
        return report_from_dict(json.load(fh))


def describe_config(cfg):
    return config_to_mapping(cfg)
