"""Online logistic risk model and the utility functions built on it."""
import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._random import as_rng

# keeps predictions strictly inside (0, 1) in float64
_Z_CLIP = 30.0

BASE_FEATURES = ("age", "male", "female", "symptomatic", "risky_history", "comorbidity")


def sigmoid(z):
    z = np.clip(z, -_Z_CLIP, _Z_CLIP)
    return 1.0 / (1.0 + np.exp(-z))


def binary_entropy(p):
    """Entropy of Bernoulli(p) in bits."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(p * np.log2(p) + (1 - p) * np.log2(1 - p))
    return np.where((p <= 0) | (p >= 1), 0.0, h)


@dataclass(frozen=True)
class FeatureEncoder:
    """Fixed-length numeric encoding of an :class:`~kitalloc.population.Individual`.

    Layout: age/100, gender one-hot, the three boolean traits, one-hot
    region over ``regions`` (all zeros for an unknown region), then
    ``n_extra`` values taken from ``individual.extra`` (zero padded).
    """

    regions: tuple = ()
    n_extra: int = 0

    @property
    def names(self):
        return (BASE_FEATURES + tuple(f"region={r}" for r in self.regions)
                + tuple(f"extra{i}" for i in range(self.n_extra)))

    @property
    def dim(self):
        return len(BASE_FEATURES) + len(self.regions) + self.n_extra

    def encode(self, ind):
        x = np.zeros(self.dim)
        x[0] = ind.age / 100.0
        x[1] = ind.gender == "Male"
        x[2] = ind.gender == "Female"
        x[3] = ind.symptomatic
        x[4] = ind.risky_history
        x[5] = ind.comorbidity
        if ind.region in self.regions:
            x[len(BASE_FEATURES) + self.regions.index(ind.region)] = 1.0
        if self.n_extra:
            extra = list(ind.extra)[: self.n_extra]
            start = len(BASE_FEATURES) + len(self.regions)
            x[start:start + len(extra)] = extra
        return x

    def encode_many(self, individuals):
        if not individuals:
            return np.zeros((0, self.dim))
        return np.vstack([self.encode(i) for i in individuals])


def encode(individual, encoder=FeatureEncoder()):
    return encoder.encode(individual)


@dataclass(frozen=True)
class LabeledObservation:
    """A logged decision.

    ``y`` is only present for tested people (``a == 1``) once their result is
    back.  ``day`` is the day the person was selected; ``visible_on_day`` the
    first day the label may be used.  ``budgeted`` marks propensities logged
    under a hard daily budget, where the raw recommendation probability is
    not the realised inclusion probability.
    """

    x: np.ndarray
    y: int | None
    a: int = 1
    propensity: float = 1.0
    day: int = 0
    visible_on_day: int = 1
    id: int | None = None
    budgeted: bool = False


@dataclass(frozen=True)
class RiskModel:
    """Logistic model ``p(y=1|x) = sigmoid(w.x + b)``.

    Immutable; :func:`update` returns a new instance.  ``label_days`` records
    the selection days of every label the model has consumed.
    """

    weights: np.ndarray
    intercept: float = 0.0
    learning_rate: float = 0.1
    n_updates: int = 0
    encoder: FeatureEncoder | None = None
    label_days: frozenset = field(default=frozenset(), compare=False)

    @classmethod
    def zeros(cls, dim=None, *, encoder=None, learning_rate=0.1):
        if dim is None:
            dim = (encoder or FeatureEncoder()).dim
        return cls(weights=np.zeros(dim), learning_rate=learning_rate, encoder=encoder)

    @property
    def feature_names(self):
        if self.encoder is not None and self.encoder.dim == self.weights.size:
            return self.encoder.names
        return tuple(f"w{i}" for i in range(self.weights.size))

    def _as_matrix(self, xs):
        if isinstance(xs, np.ndarray):
            return np.atleast_2d(xs)
        enc = self.encoder or FeatureEncoder()
        return enc.encode_many(list(xs))

    def decision_function(self, xs):
        return self._as_matrix(xs) @ self.weights + self.intercept

    def predict_proba(self, xs):
        """Vectorised ``p(y=1|x)`` for a matrix or a list of individuals."""
        return sigmoid(self.decision_function(xs))


def predict_risk(model, individual):
    """``p(y=1|x)`` for one individual (or one encoded vector)."""
    if isinstance(individual, np.ndarray):
        return float(model.predict_proba(individual)[0])
    return float(model.predict_proba([individual])[0])


def log_loss(weights, intercept, X, y, sample_weight=None):
    """Mean (weighted) negative log-likelihood, computed stably."""
    z = X @ weights + intercept
    losses = np.logaddexp(0.0, z) - y * z
    if sample_weight is None:
        return float(losses.mean())
    return float(np.sum(sample_weight * losses) / len(y))


def log_loss_gradient(weights, intercept, X, y, sample_weight=None):
    """Analytic gradient of :func:`log_loss` w.r.t. ``(weights, intercept)``."""
    z = X @ weights + intercept
    r = 1.0 / (1.0 + np.exp(-z)) - y
    if sample_weight is not None:
        r = r * sample_weight
    return X.T @ r / len(y), float(r.sum() / len(y))


def _sgd_pass(w, b, X, y, sw, lr, order):
    # scalar math per sample: numpy call overhead dominates at these sizes
    for i in order.tolist():
        xi = X[i]
        z = min(max(float(xi @ w) + b, -_Z_CLIP), _Z_CLIP)
        g = lr * sw[i] * (1.0 / (1.0 + math.exp(-z)) - y[i])
        w -= g * xi
        b -= g
    return w, b


def sgd_fit(model, X, y, *, sample_weight=None, epochs=1, seed=None):
    """Run ``epochs`` shuffled SGD passes over ``(X, y)``."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        return model
    sw = np.ones(y.size) if sample_weight is None else np.asarray(sample_weight, dtype=float)
    rng = as_rng(seed)
    w = model.weights.astype(float).copy()
    b = float(model.intercept)
    for _ in range(epochs):
        w, b = _sgd_pass(w, b, X, y.tolist(), sw.tolist(), model.learning_rate, rng.permutation(y.size))
    return replace(model, weights=w, intercept=b, n_updates=model.n_updates + epochs * y.size)


def update(model, batch, seed=None, sample_weight=None):
    """One SGD pass of log-loss over the labelled observations in ``batch``.

    Propensities are ignored here; pass ``sample_weight`` for weighted
    objectives.  An empty batch returns ``model`` unchanged.
    """
    batch = [o for o in batch if o.y is not None]
    if not batch:
        return model
    X = np.vstack([o.x for o in batch])
    y = np.array([o.y for o in batch], dtype=float)
    new = sgd_fit(model, X, y, sample_weight=sample_weight, epochs=1, seed=seed)
    return replace(new, label_days=model.label_days | {o.day for o in batch})


class UtilityMode(str, enum.Enum):
    RISK = "risk"
    ENTROPY = "entropy"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class UtilityConfig:
    mode: UtilityMode = UtilityMode.RISK

    def __post_init__(self):
        object.__setattr__(self, "mode", UtilityMode(self.mode))


def utilities(cfg, model, individuals):
    """Vectorised :func:`utility`."""
    n = len(individuals)
    if cfg.mode is UtilityMode.UNIFORM:
        return np.ones(n)
    if n == 0:
        return np.zeros(0)
    if model is None:
        raise ValueError(f"utility mode {cfg.mode.value!r} needs a risk model")
    p = model.predict_proba(individuals)
    if cfg.mode is UtilityMode.RISK:
        return p
    return binary_entropy(p)


def utility(cfg, model, individual):
    """Value of testing ``individual``: risk, predictive entropy (bits) or 1."""
    return float(utilities(cfg, model, [individual])[0])


def save_checkpoint(model, path):
    """Write ``name<TAB>weight`` lines, intercept first."""
    with open(path, "w") as fh:
        fh.write(f"intercept\t{float(model.intercept)!r}\n")
        for name, w in zip(model.feature_names, model.weights):
            fh.write(f"{name}\t{float(w)!r}\n")


def load_checkpoint(path, encoder=None, learning_rate=0.1):
    names, values = [], []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                name, value = line.rstrip("\n").split("\t")
                names.append(name)
                values.append(float(value))
    if not names or names[0] != "intercept":
        raise ValueError(f"{path}: checkpoint must start with the intercept")
    if encoder is not None and tuple(names[1:]) != encoder.names:
        raise ValueError(f"{path}: feature names do not match the encoder")
    return RiskModel(weights=np.array(values[1:]), intercept=values[0],
                     learning_rate=learning_rate, encoder=encoder)
