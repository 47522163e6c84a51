from .active import (
    Committee, disagreement, retrain_committee, select_disagreement, select_uncertainty,
)
from .bandit import (
    BanditPolicy, CostConfig, OffPolicyEstimate, bandit_predict, bandit_select, bandit_update,
    dr_evaluate,
)
from .bucket import Bucket, BucketBudget, assign_bucket, largest_remainder, select_bucket
from .stratified import (
    JointDistribution, Smoothing, StratificationConfig, compute_weights,
    estimate_cohort_distribution, select_stratified, stratum_of, target_distribution,
)
