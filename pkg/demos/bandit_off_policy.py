"""
Evaluating a new policy from logged tests
=========================================

Logged selections carry their propensities, which lets us estimate how a
different policy would have done without deploying it.
"""

# %%
import numpy as np

from kitalloc import CostConfig, LabeledObservation, RiskModel, dr_evaluate

rng = np.random.default_rng(0)
p_true = np.array([0.05, 0.2, 0.6])     # infection risk in three contexts
logging = np.array([0.5, 0.5, 0.5])     # the logging policy tested at random
contexts = np.eye(3)
cost = CostConfig(reward_tp=1.0, cost_fp=-0.1)

# %%
# Simulate a log: only tested people reveal a label.
log = []
for _ in range(5000):
    c = rng.integers(3)
    a = int(rng.random() < logging[c])
    y = int(rng.random() < p_true[c]) if a else None
    log.append(LabeledObservation(x=contexts[c], a=a, y=y, propensity=logging[c] if a else 1 - logging[c]))

# %%
# Target: test only the riskiest context.  The reward model is deliberately
# a little off; the doubly robust estimate corrects it with the logged data.
target = lambda X: X @ np.array([0.0, 0.0, 1.0])  # noqa: E731
reward_model = RiskModel(weights=np.log([0.1 / 0.9, 0.3 / 0.7, 0.5 / 0.5]), intercept=0.0)
est = dr_evaluate(target, log, cost, reward_model)
truth = np.mean([0, 0, p_true[2] * cost.reward_tp + (1 - p_true[2]) * cost.cost_fp])
print(f"true value {truth:.4f}  IPS {est.ips:.4f}  DR {est.dr:.4f}")
