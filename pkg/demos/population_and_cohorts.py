"""
Synthetic populations and daily cohorts
=======================================

Build a population from the bundled census table, let people arrive at a
symptom checker, and look at how arrivals differ from the census.
"""

# %%
# The national age x gender table, folded into five coarse age bins.
import numpy as np

from kitalloc import (
    ArrivalModel, GroundTruthModel, draw_daily_cohort, generate_population, load_default_table,
)

demo = load_default_table()
census = demo.joint()
for (age, gender), p in sorted(census.items(), key=lambda kv: (kv[0][0], kv[0][1].value)):
    print(f"{age:>6} {gender.value:<7} {p:.3f}")

# %%
# Infection is logistic in symptoms, history, comorbidity and age.  The
# hidden status never leaves the population module except through an oracle.
pop = generate_population(20_000, demo, GroundTruthModel(), seed=1)
print("prevalence", np.mean([p.hidden_infected for p in pop]))

# %%
# Symptomatic people are three times as likely to show up, so cohorts skew
# older and sicker than the census.
cohort = draw_daily_cohort(pop, day=1, arrival_model=ArrivalModel(cohort_size=1000), seed=2)
print("symptomatic share, population:", np.mean([p.symptomatic for p in pop]))
print("symptomatic share, cohort:    ", np.mean([m.symptomatic for m in cohort.members]))
print("arrivals per four-hour slot:", cohort.slot_counts().tolist())
