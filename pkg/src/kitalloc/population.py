"""Individuals, synthetic populations, daily arrival cohorts and the
infection ground truth.

Demographic reference data ship as two CSV files under ``kitalloc/data``:

* ``national_age.csv`` with header ``age_bin,total,male,female`` and the
  eighteen five-year age rows ``0-4`` .. ``85+`` (values in percent);
* ``statewise.csv`` with header
  ``state,sex_ratio,pct60_total,pct60_male,pct60_female``; unknown values
  are empty fields.
"""
import csv
import enum
import math
from dataclasses import dataclass, field
from importlib import resources
from types import MappingProxyType

import numpy as np

from ._random import as_rng
from .errors import ContractViolation, SchemaError, ValidationError
from .sampling import weighted_sample_indices

COARSE_BINS = ("<20", "20-40", "40-60", "60-80", ">80")
FINE_BINS = (
    "0-4", "5-9", "10-14", "15-19", "20-24", "25-29", "30-34", "35-39",
    "40-44", "45-49", "50-54", "55-59", "60-64", "65-69", "70-74", "75-79",
    "80-84", "85+",
)
# inclusive age range of each fine row
_FINE_RANGES = [(5 * i, 5 * i + 4) for i in range(17)] + [(85, 100)]
N_SLOTS = 6
NATIONAL = "India"

NATIONAL_COLUMNS = ("age_bin", "total", "male", "female")
STATEWISE_COLUMNS = ("state", "sex_ratio", "pct60_total", "pct60_male", "pct60_female")


class Gender(str, enum.Enum):
    MALE = "Male"
    FEMALE = "Female"


GENDERS = (Gender.MALE, Gender.FEMALE)


def age_bin(age):
    """Coarse age bin label for an integer age."""
    if age < 20:
        return "<20"
    if age < 40:
        return "20-40"
    if age < 60:
        return "40-60"
    if age < 80:
        return "60-80"
    return ">80"


def _coarse_of_fine(i):
    return age_bin(_FINE_RANGES[i][0])


@dataclass(frozen=True)
class Individual:
    """One registrant.  ``hidden_infected`` is ground truth and must only be
    read through :class:`InfectionOracle`."""

    id: int
    age: int
    gender: Gender
    region: str = NATIONAL
    symptomatic: bool = False
    risky_history: bool = False
    comorbidity: bool = False
    hidden_infected: bool = field(default=False, repr=False, compare=False)
    extra: tuple = ()

    def __post_init__(self):
        if not 0 <= self.age <= 100:
            raise ValidationError(f"age {self.age} outside [0, 100]")


@dataclass(frozen=True)
class DailyCohort:
    day: int
    members: list
    slot_of: dict  # individual id -> slot in 0..5

    def __len__(self):
        return len(self.members)

    @property
    def ids(self):
        return [m.id for m in self.members]

    def slot_counts(self):
        counts = np.zeros(N_SLOTS, dtype=int)
        for s in self.slot_of.values():
            counts[s] += 1
        return counts


@dataclass(frozen=True)
class StateProfile:
    sex_ratio: float | None  # females per 1000 males
    pct60_total: float | None
    pct60_male: float | None
    pct60_female: float | None


@dataclass(frozen=True)
class DemographicTable:
    """Joint age x gender proportions.

    ``fine`` is an (18, 2) array over the five-year rows and (Male, Female),
    summing to one.  ``states`` holds optional per-state adjustments used to
    derive regional tables.
    """

    fine: np.ndarray
    states: MappingProxyType = field(default_factory=lambda: MappingProxyType({}))

    def fine_joint(self, region=None):
        if region is None or region == NATIONAL or region not in self.states:
            return self.fine
        return _state_adjusted(self.fine, self.states[region])

    def joint(self, region=None):
        """Coarse ``{(age_bin, Gender): p}`` for the nation or one state."""
        fine = self.fine_joint(region)
        out = {(b, g): 0.0 for b in COARSE_BINS for g in GENDERS}
        for i in range(len(FINE_BINS)):
            for j, g in enumerate(GENDERS):
                out[(_coarse_of_fine(i), g)] += float(fine[i, j])
        return out


def _state_adjusted(fine, profile):
    """Rescale the national table to a state's sex ratio and 60+ shares."""
    old = np.array([r[0] >= 60 for r in _FINE_RANGES])
    out = np.empty_like(fine)
    for j, pct in enumerate((profile.pct60_male, profile.pct60_female)):
        within = fine[:, j] / fine[:, j].sum()
        share_nat = within[old].sum()
        if pct is None or not 0 < share_nat < 1:
            out[:, j] = within
            continue
        share = pct / 100.0
        out[:, j] = np.where(old, within * share / share_nat, within * (1 - share) / (1 - share_nat))
    col = fine.sum(axis=0)
    if profile.sex_ratio is not None:
        p_female = profile.sex_ratio / (1000.0 + profile.sex_ratio)
        col = np.array([1 - p_female, p_female])
    out = out * (col / col.sum())
    return out / out.sum()


def _read_rows(path, columns):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = [h.strip() for h in (reader.fieldnames or [])]
        missing = [c for c in columns if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
        return [{k.strip(): (v or "").strip() for k, v in row.items() if k is not None} for row in reader]


def _number(text, where, optional=False):
    text = text.replace(",", "").strip()
    if text in ("", "-"):
        if optional:
            return None
        raise SchemaError(f"{where}: missing value")
    try:
        value = float(text)
    except ValueError:
        raise SchemaError(f"{where}: not a number: {text!r}") from None
    if not math.isfinite(value) or value < 0:
        raise ValidationError(f"{where}: proportion must be non-negative, got {text}")
    return value


def ingest_demographic_table(path, schema="national", base=None):
    """Read a demographic CSV.

    ``schema="national"`` returns a fresh table.  ``schema="statewise"``
    attaches state profiles to ``base`` (a national table; the shipped one
    when omitted) and returns the combined table.
    """
    if schema == "national":
        rows = _read_rows(path, NATIONAL_COLUMNS)
        labels = [r["age_bin"] for r in rows]
        if len(labels) != len(FINE_BINS) or set(labels) != set(FINE_BINS):
            raise SchemaError(f"{path}: rows must be exactly the age bins {', '.join(FINE_BINS)}")
        fine = np.zeros((len(FINE_BINS), 2))
        for r in rows:
            i = FINE_BINS.index(r["age_bin"])
            _number(r["total"], f"{path}:{r['age_bin']}:total")
            fine[i, 0] = _number(r["male"], f"{path}:{r['age_bin']}:male")
            fine[i, 1] = _number(r["female"], f"{path}:{r['age_bin']}:female")
        total = fine.sum()
        if total <= 0:
            raise ValidationError(f"{path}: table has no mass")
        return DemographicTable(fine=fine / total)
    if schema == "statewise":
        rows = _read_rows(path, STATEWISE_COLUMNS)
        states = {}
        for r in rows:
            name = r["state"]
            vals = [_number(r[c], f"{path}:{name}:{c}", optional=True) for c in STATEWISE_COLUMNS[1:]]
            for v in vals[1:]:
                if v is not None and v > 100:
                    raise ValidationError(f"{path}:{name}: percentage above 100")
            states[name] = StateProfile(*vals)
        if base is None:
            base = load_national_table()
        return DemographicTable(fine=base.fine, states=MappingProxyType(states))
    raise ValueError(f"unknown schema {schema!r}; expected 'national' or 'statewise'")


def _data_path(name):
    return resources.files("kitalloc") / "data" / name


def load_national_table():
    with resources.as_file(_data_path("national_age.csv")) as p:
        return ingest_demographic_table(p, "national")


def load_default_table():
    """National table with the shipped state profiles attached."""
    with resources.as_file(_data_path("statewise.csv")) as p:
        return ingest_demographic_table(p, "statewise", base=load_national_table())


@dataclass(frozen=True)
class TraitModel:
    """Probabilities of the observable boolean traits.  Symptoms and
    comorbidity rise linearly with age (per year / 100)."""

    symptomatic_base: float = 0.04
    symptomatic_age_slope: float = 0.12
    risky: float = 0.05
    comorbidity_base: float = 0.02
    comorbidity_age_slope: float = 0.4


@dataclass(frozen=True)
class GroundTruthModel:
    """Logistic infection model over observable features.

    With every adjustment zero each person is infected with probability
    ``p0`` exactly.
    """

    p0: float = 0.02
    symptomatic: float = 2.0
    risky_history: float = 1.5
    comorbidity: float = 0.5
    age: float = 0.5  # log-odds per 100 years

    def __post_init__(self):
        if not 0 <= self.p0 <= 1:
            raise ValidationError("p0 must lie in [0, 1]")

    def probability(self, age, symptomatic, risky_history, comorbidity):
        if self.p0 in (0.0, 1.0):
            return np.full(np.shape(age), float(self.p0))
        z = (math.log(self.p0 / (1 - self.p0))
             + self.symptomatic * np.asarray(symptomatic, float)
             + self.risky_history * np.asarray(risky_history, float)
             + self.comorbidity * np.asarray(comorbidity, float)
             + self.age * np.asarray(age, float) / 100.0)
        return 1.0 / (1.0 + np.exp(-z))


def generate_population(size, demo, truth, seed=None, *, traits=TraitModel(), region=NATIONAL, id_offset=0):
    """Synthesize ``size`` individuals whose (age bin, gender) frequencies
    follow ``demo`` (or the state table for ``region``)."""
    if size < 1:
        raise ValueError("population size must be at least 1")
    rng = as_rng(seed)
    fine = demo.fine_joint(region)
    cells = rng.choice(fine.size, size=size, p=fine.ravel())
    rows, cols = np.divmod(cells, 2)
    lo = np.array([r[0] for r in _FINE_RANGES])[rows]
    hi = np.array([r[1] for r in _FINE_RANGES])[rows]
    ages = rng.integers(lo, hi + 1)
    a = ages / 100.0
    symptomatic = rng.random(size) < traits.symptomatic_base + traits.symptomatic_age_slope * a
    risky = rng.random(size) < traits.risky
    comorb = rng.random(size) < traits.comorbidity_base + traits.comorbidity_age_slope * a
    infected = rng.random(size) < truth.probability(ages, symptomatic, risky, comorb)
    return [
        Individual(
            id=id_offset + i, age=int(ages[i]), gender=GENDERS[cols[i]], region=region,
            symptomatic=bool(symptomatic[i]), risky_history=bool(risky[i]),
            comorbidity=bool(comorb[i]), hidden_infected=bool(infected[i]),
        )
        for i in range(size)
    ]


@dataclass(frozen=True)
class ArrivalModel:
    """How registrants reach the symptom checker on a given day.

    ``symptomatic_bias`` multiplies the arrival odds of symptomatic people;
    1 gives an unbiased subsample of the eligible pool.
    """

    cohort_size: int = 1000
    slot_probs: tuple = (1 / 6,) * 6
    symptomatic_bias: float = 3.0

    def __post_init__(self):
        if len(self.slot_probs) != N_SLOTS:
            raise ValidationError(f"slot_probs needs {N_SLOTS} entries")
        if any(p < 0 for p in self.slot_probs) or not math.isclose(sum(self.slot_probs), 1.0, abs_tol=1e-9):
            raise ValidationError("slot_probs must be a probability vector")
        if self.symptomatic_bias <= 0:
            raise ValidationError("symptomatic_bias must be positive")
        if self.cohort_size < 0:
            raise ValidationError("cohort_size must be non-negative")


def draw_daily_cohort(pop, day, arrival_model, seed=None, exclude=frozenset()):
    """Draw day ``day``'s registrants from ``pop``, skipping ids in
    ``exclude``.  Returns ``None`` when nobody is eligible."""
    if not pop:
        raise ValueError("population is empty")
    eligible = [p for p in pop if p.id not in exclude]
    if not eligible or arrival_model.cohort_size == 0:
        return None
    rng = as_rng(seed)
    bias = arrival_model.symptomatic_bias
    weights = np.array([bias if p.symptomatic else 1.0 for p in eligible])
    idx = weighted_sample_indices(weights, arrival_model.cohort_size, rng)
    slots = rng.choice(N_SLOTS, size=len(idx), p=np.asarray(arrival_model.slot_probs))
    picked = sorted(zip(slots.tolist(), [eligible[i] for i in idx]), key=lambda t: (t[0], t[1].id))
    return DailyCohort(day=day, members=[m for _, m in picked], slot_of={m.id: s for s, m in picked})


class InfectionOracle:
    """Reveals test results, and only for people cleared for testing.

    Repeated queries return the same label.
    """

    def __init__(self):
        self._cleared = set()
        self.queries = 0

    def authorize(self, ids):
        self._cleared.update(ids)

    def is_authorized(self, ident):
        return ident in self._cleared

    def __call__(self, individual):
        if individual.id not in self._cleared:
            raise ContractViolation(f"individual {individual.id} was never selected for testing")
        self.queries += 1
        return int(individual.hidden_infected)


def infection_oracle(individual, oracle):
    """Functional spelling of ``oracle(individual)``."""
    return oracle(individual)
