"""Simulation configuration and its flat ``key = value`` file format.

Example::

    # lines starting with '#' are comments
    days = 30
    budget = 50              # or a per-day list: [50, 60, 70]
    strategy = stratified
    mode = offline
    bucket.split = [0.4, 0.3, 0.2, 0.1]
    strat.features = [gender, age_bin]
    pooling.enabled = true

Unknown keys are rejected with the key path in the message.
"""
from dataclasses import dataclass, field, replace

from .errors import ConfigError
from .model import UtilityMode
from .pooling import PoolStrategy
from .population import N_SLOTS, NATIONAL, GroundTruthModel, TraitModel
from .strategies.stratified import FEATURE_GETTERS, Smoothing

STRATEGIES = ("uniform", "bucket", "stratified", "bandit", "active_uncertainty", "active_disagreement")
MODES = ("offline", "online")


@dataclass(frozen=True)
class BucketSettings:
    split: tuple = (0.4, 0.3, 0.2, 0.1)
    mandatory_x1: bool = False


@dataclass(frozen=True)
class StratSettings:
    features: tuple = ("gender", "age_bin")
    smoothing: str = "additive"
    lam: float = 0.5
    utility: str = "risk"


@dataclass(frozen=True)
class BanditSettings:
    epsilon: float = 0.1
    temperature: float = 1.0
    bootstrap_days: int = 3
    reward_tp: float = 1.0
    cost_fp: float = -0.1
    calibrate_budget: bool = False


@dataclass(frozen=True)
class ActiveSettings:
    committee_size: int = 10
    lambda_d: float = 1e-3
    epochs: int = 5


@dataclass(frozen=True)
class PoolingSettings:
    enabled: bool = False
    size: int = 5
    strategy: str = "dorfman"
    prevalence: float = 0.024  # prior for sizing the people budget


@dataclass(frozen=True)
class SimulationConfig:
    days: int = 30
    population_size: int = 50_000
    cohort_size: int = 1000
    budget: object = 50  # int, or a list with one entry per day
    strategy: str = "uniform"
    mode: str = "offline"
    seed: int = 0
    region: str = NATIONAL
    probe_size: int = 1000
    label_delay: int = 1
    learning_rate: float = 0.1
    symptomatic_bias: float = 3.0
    slot_probs: tuple = (1 / 6,) * 6
    online_score: str = "key"
    truth: GroundTruthModel = field(default_factory=GroundTruthModel)
    traits: TraitModel = field(default_factory=TraitModel)
    bucket: BucketSettings = field(default_factory=BucketSettings)
    strat: StratSettings = field(default_factory=StratSettings)
    bandit: BanditSettings = field(default_factory=BanditSettings)
    active: ActiveSettings = field(default_factory=ActiveSettings)
    pooling: PoolingSettings = field(default_factory=PoolingSettings)

    def __post_init__(self):
        validate(self)

    def budget_on(self, day):
        if isinstance(self.budget, (list, tuple)):
            return int(self.budget[day - 1])
        return int(self.budget)

    def with_(self, **changes):
        return replace(self, **changes)


def _check(cond, path, msg):
    if not cond:
        raise ConfigError(path, msg)


def validate(cfg):
    _check(isinstance(cfg.days, int) and cfg.days >= 1, "days", "must be an integer >= 1")
    _check(cfg.population_size >= 1, "population_size", "must be >= 1")
    _check(cfg.cohort_size >= 0, "cohort_size", "must be >= 0")
    if isinstance(cfg.budget, (list, tuple)):
        _check(len(cfg.budget) == cfg.days, "budget", f"needs one entry per day ({cfg.days})")
        _check(all(int(k) == k and k >= 0 for k in cfg.budget), "budget", "entries must be integers >= 0")
    else:
        _check(int(cfg.budget) == cfg.budget and cfg.budget >= 0, "budget", "must be an integer >= 0")
    _check(cfg.strategy in STRATEGIES, "strategy", f"must be one of {', '.join(STRATEGIES)}")
    _check(cfg.mode in MODES, "mode", "must be offline or online")
    _check(cfg.probe_size >= 1, "probe_size", "must be >= 1")
    _check(cfg.label_delay >= 1, "label_delay", "labels cannot be used on the day they are produced")
    _check(cfg.learning_rate > 0, "learning_rate", "must be positive")
    _check(cfg.symptomatic_bias > 0, "arrival.symptomatic_bias", "must be positive")
    _check(len(cfg.slot_probs) == N_SLOTS and min(cfg.slot_probs) >= 0
           and abs(sum(cfg.slot_probs) - 1) < 1e-9, "arrival.slots", "must be six shares summing to 1")
    _check(cfg.online_score in ("key", "raw"), "online.score", "must be key or raw")
    b = cfg.bucket
    _check(len(b.split) == 4 and min(b.split) >= 0 and abs(sum(b.split) - 1) < 1e-9,
           "bucket.split", "must be four non-negative fractions summing to 1")
    s = cfg.strat
    _check(len(s.features) > 0 and set(s.features) <= set(FEATURE_GETTERS), "strat.features",
           f"must be a non-empty subset of {sorted(FEATURE_GETTERS)}")
    _check(set(s.features) <= {"gender", "age_bin"}, "strat.features",
           "the census table only covers gender and age_bin")
    _check(s.smoothing in {m.value for m in Smoothing}, "strat.smoothing", "must be zero or additive")
    _check(s.lam > 0, "strat.lambda", "must be positive")
    _check(s.utility in {m.value for m in UtilityMode}, "strat.utility", "must be risk, entropy or uniform")
    k = cfg.bandit
    _check(0 <= k.epsilon <= 1, "bandit.epsilon", "must lie in [0, 1]")
    _check(k.temperature > 0, "bandit.temperature", "must be positive")
    _check(k.bootstrap_days >= 0, "bandit.bootstrap_days", "must be >= 0")
    _check(k.reward_tp > 0, "bandit.reward_tp", "must be positive")
    _check(k.cost_fp <= 0, "bandit.cost_fp", "must be <= 0")
    a = cfg.active
    _check(a.committee_size >= 2, "active.committee_size", "must be >= 2")
    _check(a.lambda_d >= 0, "active.lambda_d", "must be >= 0")
    _check(a.epochs >= 1, "active.epochs", "must be >= 1")
    p = cfg.pooling
    _check(p.size >= 1, "pooling.size", "must be >= 1")
    _check(p.strategy in {m.value for m in PoolStrategy}, "pooling.strategy", "must be dorfman or binary")
    _check(0 <= p.prevalence <= 1, "pooling.prevalence", "must lie in [0, 1]")


# flat key -> (section or None, attribute)
_KEYS = {
    "days": (None, "days"),
    "population_size": (None, "population_size"),
    "cohort_size": (None, "cohort_size"),
    "budget": (None, "budget"),
    "strategy": (None, "strategy"),
    "mode": (None, "mode"),
    "seed": (None, "seed"),
    "region": (None, "region"),
    "probe_size": (None, "probe_size"),
    "label_delay": (None, "label_delay"),
    "model.learning_rate": (None, "learning_rate"),
    "arrival.symptomatic_bias": (None, "symptomatic_bias"),
    "arrival.slots": (None, "slot_probs"),
    "online.score": (None, "online_score"),
    "truth.p0": ("truth", "p0"),
    "truth.symptomatic": ("truth", "symptomatic"),
    "truth.risky_history": ("truth", "risky_history"),
    "truth.comorbidity": ("truth", "comorbidity"),
    "truth.age": ("truth", "age"),
    "traits.symptomatic_base": ("traits", "symptomatic_base"),
    "traits.symptomatic_age_slope": ("traits", "symptomatic_age_slope"),
    "traits.risky": ("traits", "risky"),
    "traits.comorbidity_base": ("traits", "comorbidity_base"),
    "traits.comorbidity_age_slope": ("traits", "comorbidity_age_slope"),
    "bucket.split": ("bucket", "split"),
    "bucket.mandatory_x1": ("bucket", "mandatory_x1"),
    "strat.features": ("strat", "features"),
    "strat.smoothing": ("strat", "smoothing"),
    "strat.lambda": ("strat", "lam"),
    "strat.utility": ("strat", "utility"),
    "bandit.epsilon": ("bandit", "epsilon"),
    "bandit.temperature": ("bandit", "temperature"),
    "bandit.bootstrap_days": ("bandit", "bootstrap_days"),
    "bandit.reward_tp": ("bandit", "reward_tp"),
    "bandit.cost_fp": ("bandit", "cost_fp"),
    "bandit.calibrate_budget": ("bandit", "calibrate_budget"),
    "active.mode": (None, "_active_mode"),
    "active.committee_size": ("active", "committee_size"),
    "active.lambda_d": ("active", "lambda_d"),
    "active.epochs": ("active", "epochs"),
    "pooling.enabled": ("pooling", "enabled"),
    "pooling.size": ("pooling", "size"),
    "pooling.strategy": ("pooling", "strategy"),
    "pooling.prevalence": ("pooling", "prevalence"),
}


def parse_value(text):
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        inner = text[1:-1].strip()
        return [parse_value(t) for t in inner.split(",")] if inner else []
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "'\"":
        return text[1:-1]
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def parse_config_text(text):
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = parse_value(value)
    return out


def load_config(path, **overrides):
    with open(path) as fh:
        mapping = parse_config_text(fh.read())
    mapping.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_mapping(mapping)


def _coerce(path, current, value):
    try:
        if isinstance(current, bool):
            if not isinstance(value, bool):
                raise TypeError
            return value
        if isinstance(current, int) and not isinstance(current, bool):
            if isinstance(value, bool) or int(value) != value:
                raise TypeError
            return int(value)
        if isinstance(current, float):
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if isinstance(current, tuple):
            items = value if isinstance(value, list) else [value]
            return tuple(float(v) if isinstance(current[0], float) else str(v) for v in items)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(path, f"invalid value {value!r}") from None


def config_from_mapping(mapping, base=None):
    """Build a :class:`SimulationConfig` from flat dotted keys."""
    base = base or SimulationConfig()
    top, sections = {}, {}
    active_mode = None
    for key, value in mapping.items():
        if key not in _KEYS:
            raise ConfigError(key, "unknown configuration key")
        section, attr = _KEYS[key]
        if attr == "_active_mode":
            _check(value in ("uncertainty", "disagreement"), key, "must be uncertainty or disagreement")
            active_mode = value
        elif section is None:
            if attr == "budget" and isinstance(value, list):
                top[attr] = [_coerce(key, 0, v) for v in value]
            else:
                top[attr] = _coerce(key, getattr(base, attr), value)
        else:
            current = getattr(getattr(base, section), attr)
            sections.setdefault(section, {})[attr] = _coerce(key, current, value)
    if top.get("strategy") == "active":
        top["strategy"] = f"active_{active_mode or 'uncertainty'}"
    for section, changes in sections.items():
        try:
            top[section] = replace(getattr(base, section), **changes)
        except Exception as exc:  # dataclass-level validation
            raise ConfigError(section, str(exc)) from None
    return replace(base, **top)


def config_to_mapping(cfg):
    """Inverse of :func:`config_from_mapping` (for echoing into reports)."""
    out = {}
    for key, (section, attr) in _KEYS.items():
        if attr == "_active_mode":
            continue
        obj = cfg if section is None else getattr(cfg, section)
        value = getattr(obj, attr)
        out[key] = list(value) if isinstance(value, (tuple, list)) else value
    return out

