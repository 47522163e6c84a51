import itertools

from kitalloc.population import DailyCohort, Gender, Individual

_ids = itertools.count(10_000)


def person(age=30, gender=Gender.MALE, symptomatic=False, risky=False, comorbidity=False,
           infected=False, region="India", id=None):
    return Individual(
        id=next(_ids) if id is None else id, age=age, gender=gender, region=region,
        symptomatic=symptomatic, risky_history=risky, comorbidity=comorbidity,
        hidden_infected=infected,
    )


def cohort_of(members, day=1, slots=None):
    slots = slots or [i % 6 for i in range(len(members))]
    return DailyCohort(day=day, members=list(members), slot_of={m.id: s for m, s in zip(members, slots)})
