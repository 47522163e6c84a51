"""
Deciding on the spot
====================

In online mode nobody waits for the end of the day.  Each four-hour slot
gets a share of the budget from yesterday's arrivals, and an arrival is
recommended if it beats yesterday's cut-off score for that slot.
"""

# %%
import numpy as np

from kitalloc import compute_alphas, open_day, run_online_day, slot_caps
from kitalloc.population import DailyCohort, Individual

rng = np.random.default_rng(4)


def cohort(day, counts, start):
    slots = [t for t, n in enumerate(counts) for _ in range(n)]
    members = [Individual(id=start + i, age=40, gender="male", region="India") for i in range(len(slots))]
    return DailyCohort(day, members, {m.id: s for m, s in zip(members, slots)})


yesterday = cohort(1, [50, 100, 150, 200, 300, 200], 0)
alphas = compute_alphas(yesterday)
print("slot shares:", alphas.round(3).tolist())
print("caps for K=40:", slot_caps(alphas, 40).tolist())

# %%
# Yesterday's scores set the bar; today's arrivals stream through the gate.
prev_scores = {i: float(rng.random()) for i in yesterday.ids}
today = cohort(2, [80, 120, 120, 200, 250, 230], 10_000)
scores = {i: float(rng.random()) for i in today.ids}
states = open_day(2, 40, yesterday, prev_scores)
day = run_online_day(states, today, scores, seed=5)
print("recommended:", len(day.recommended), "of", day.decisions, "arrivals")
print("per slot:", [s.accepted_so_far for s in states], "thresholds:",
      [round(s.threshold, 3) if s.threshold is not None else None for s in states])
