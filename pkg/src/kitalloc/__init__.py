"""Budgeted test-kit allocation: selection strategies, an online rate
limiter, pooled testing analytics and a deterministic day-loop simulator."""
from .config import SimulationConfig, config_from_mapping, load_config
from .model import (
    FeatureEncoder, LabeledObservation, RiskModel, UtilityConfig, UtilityMode, predict_risk, update,
    utility,
)
from .online import compute_alphas, decide_online, open_day, run_online_day, slot_caps
from .pooling import (
    PoolStrategy, effective_budget, expected_tests_per_person, make_pools, resolve_pools,
)
from .population import (
    ArrivalModel, DailyCohort, DemographicTable, Gender, GroundTruthModel, Individual,
    InfectionOracle, draw_daily_cohort, generate_population, ingest_demographic_table,
    load_default_table,
)
from .sampling import WeightedCandidate, top_k_by_score, weighted_sample_without_replacement
from .selection import SelectionResult
from .simulator import compare_strategies, emit_report, run_simulation
from .strategies import (
    BanditPolicy, BucketBudget, Committee, CostConfig, StratificationConfig, bandit_select, bandit_update,
    dr_evaluate, retrain_committee, select_bucket, select_disagreement, select_stratified,
    select_uncertainty,
)

__version__ = "0.1.0"
