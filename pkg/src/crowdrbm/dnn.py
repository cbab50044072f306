"""Stacked-RBM deep network: SVD-based width selection, greedy layer-wise
training, two prediction modes, global flip resolution, and random
hyperparameter search.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .baselines import majority_vote
from .rbm import (
    ENUMERATION_LIMIT,
    RbmParams,
    TrainConfig,
    as_prediction_matrix,
    exact_log_likelihood,
    free_energy,
    hidden_activation,
    sample_layer,
    train_rbm,
)

SVD_ENERGY_THRESHOLD = 0.95

DEFAULT_N_PASSES = 100

# Width probes are trained with stronger weight decay, constant 0.5 momentum
# and trailing-iterate averaging: the raw training noise otherwise swamps the
# small singular values and the 95% rule badly over-estimates the rank.
DEFAULT_PROBE_CONFIG = TrainConfig(
    learning_rate=0.05,
    cd_k=1,
    epochs=100,
    batch_size=100,
    momentum=0.5,
    weight_decay=0.01,
    seed=0,
    avg_frac=0.3,
)


@dataclass(frozen=True)
class DnnModel:
    """Stack of RBMs ending in a width-1 layer, plus a global label flip.

    Layer L+1's visible width equals layer L's hidden width; widths strictly
    decrease. ``architecture`` is the width sequence (d, m1, ..., 1).
    """

    layers: tuple
    flip: bool
    architecture: tuple

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ValueError("model needs at least one layer")
        for layer in layers:
            if not isinstance(layer, RbmParams):
                raise TypeError("layers must be RbmParams instances")
        widths = [layers[0].n_visible] + [lyr.n_hidden for lyr in layers]
        for lo, hi in zip(layers[:-1], layers[1:]):
            if lo.n_hidden != hi.n_visible:
                raise ValueError(
                    f"layer widths do not chain: {lo.n_hidden} -> {hi.n_visible}"
                )
        if widths[-1] != 1:
            raise ValueError("final layer must have a single hidden unit")
        if any(w2 >= w1 for w1, w2 in zip(widths[:-1], widths[1:])):
            raise ValueError(f"widths must strictly decrease, got {widths}")
        if tuple(self.architecture) != tuple(widths):
            raise ValueError(
                f"architecture {tuple(self.architecture)} does not match "
                f"layer widths {tuple(widths)}"
            )
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "flip", bool(self.flip))
        object.__setattr__(self, "architecture", tuple(widths))

    @property
    def n_visible(self) -> int:
        return self.layers[0].n_visible

    def architecture_string(self) -> str:
        return "-".join(str(w) for w in self.architecture)


@dataclass(frozen=True)
class HyperSpace:
    """Search ranges for TrainConfig fields.

    ``ranges`` maps a field name to (min, max, scale) with scale "linear" or
    "log". Integer fields are rounded after sampling.
    """

    ranges: dict
    n_configs: int

    _INT_FIELDS = frozenset({"cd_k", "epochs", "batch_size"})
    _FLOAT_FIELDS = frozenset({"learning_rate", "momentum", "weight_decay", "avg_frac"})

    def __post_init__(self):
        if not self.ranges:
            raise ValueError("hyperparameter space is empty")
        if self.n_configs < 1:
            raise ValueError("n_configs must be a positive integer")
        for name, (lo, hi, scale) in self.ranges.items():
            if name not in self._INT_FIELDS | self._FLOAT_FIELDS:
                raise ValueError(f"unknown TrainConfig field: {name!r}")
            if lo > hi:
                raise ValueError(f"{name}: min {lo} exceeds max {hi}")
            if scale not in ("linear", "log"):
                raise ValueError(f"{name}: scale must be 'linear' or 'log'")
            if scale == "log" and lo <= 0:
                raise ValueError(f"{name}: log scale requires positive bounds")

    def sample(self, rng: np.random.Generator, base: TrainConfig) -> TrainConfig:
        values = {}
        for name, (lo, hi, scale) in sorted(self.ranges.items()):
            if scale == "log":
                value = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
            else:
                value = float(rng.uniform(lo, hi))
            if name in self._INT_FIELDS:
                value = int(round(value))
            values[name] = value
        return replace(base, **values)


def choose_hidden_width(W) -> int:
    """Smallest k whose top-k singular values hold at least 95% of the
    total singular value sum."""
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 2:
        raise ValueError("W must be a matrix")
    if not W.any():
        raise ValueError("cannot choose a width for an all-zero weight matrix")
    s = np.linalg.svd(W, compute_uv=False)
    cumulative = np.cumsum(s) / s.sum()
    return int(np.argmax(cumulative >= SVD_ENERGY_THRESHOLD)) + 1


def _fit_score(params: RbmParams, X: np.ndarray, rng: np.random.Generator) -> float:
    """Goodness-of-fit for restart selection: exact mean log-likelihood when
    enumerable, otherwise the free-energy gap against a column-shuffled
    surrogate."""
    if params.n_visible <= ENUMERATION_LIMIT:
        return exact_log_likelihood(params, X) / X.shape[0]
    shuffled = np.column_stack([rng.permutation(X[:, j]) for j in range(X.shape[1])])
    return float(np.mean(free_energy(params, shuffled)) - np.mean(free_energy(params, X)))


def _train_selected(X: np.ndarray, m: int, config: TrainConfig,
                    seeds, score_rng: np.random.Generator) -> RbmParams:
    """Train one RBM per seed and keep the best-fitting one."""
    best, best_score = None, -np.inf
    for seed in seeds:
        params = train_rbm(X, m, replace(config, seed=int(seed)))
        score = _fit_score(params, X, score_rng)
        if score > best_score:
            best, best_score = params, score
    return best


def train_stack(data, config: TrainConfig,
                probe_config: TrainConfig | None = None,
                n_restarts: int = 2) -> DnnModel:
    """Greedy layer-wise training with SVD width selection.

    At each level a probe RBM as wide as its input is trained and the next
    width is read off its weight spectrum (capped below the current width so
    the recursion terminates); the layer is then retrained at that width and
    the next level's training set is one sampled hidden vector per example.
    Per layer, ``n_restarts`` candidate RBMs are trained and the best fit by
    likelihood is kept. The global label flip is resolved against the
    majority vote of the training data. Deterministic given ``config.seed``.
    """
    X = as_prediction_matrix(data)
    if X.shape[1] < 2:
        raise ValueError("stack training requires d >= 2")
    if n_restarts < 1:
        raise ValueError("n_restarts must be a positive integer")
    if probe_config is None:
        probe_config = DEFAULT_PROBE_CONFIG

    seq = np.random.SeedSequence(config.seed)
    layers = []
    current = X
    while True:
        width_in = current.shape[1]
        probe_seq, retrain_seq, sample_seq, score_seq, seq = seq.spawn(5)
        score_rng = np.random.default_rng(score_seq)

        probe_seed = int(probe_seq.generate_state(1)[0])
        probe = train_rbm(current, width_in, replace(probe_config, seed=probe_seed))
        m = min(choose_hidden_width(probe.W), width_in - 1)

        retrain_seeds = retrain_seq.generate_state(n_restarts)
        layer = _train_selected(current, m, config, retrain_seeds, score_rng)
        layers.append(layer)
        if m == 1:
            break
        rng = np.random.default_rng(sample_seq)
        current = sample_layer(hidden_activation(layer, current), rng)

    architecture = (X.shape[1],) + tuple(lyr.n_hidden for lyr in layers)
    model = DnnModel(layers=tuple(layers), flip=False, architecture=architecture)
    return replace(model, flip=resolve_label_flip(model, X))


def predict_proba(model: DnnModel, data, mode: str = "map",
                  n_passes: int = DEFAULT_N_PASSES,
                  rng: np.random.Generator | None = None) -> np.ndarray:
    """Posterior estimates for every row of ``data``.

    In "map" mode every hidden layer is thresholded at 0.5 and the top
    unit's activation is read out once. In "sample" mode the hidden layers
    are sampled and the top activation is averaged over ``n_passes`` passes.
    """
    X = np.atleast_2d(np.asarray(data, dtype=np.float64))
    if X.shape[1] != model.n_visible:
        raise ValueError(
            f"input has {X.shape[1]} columns, model expects {model.n_visible}"
        )
    top = model.layers[-1]

    if mode == "map":
        h = X
        for layer in model.layers[:-1]:
            h = (hidden_activation(layer, h) >= 0.5).astype(np.float64)
        out = hidden_activation(top, h)[:, 0]
    elif mode == "sample":
        if n_passes < 1:
            raise ValueError("n_passes must be a positive integer")
        if rng is None:
            raise ValueError("sample mode needs a random generator")
        out = np.zeros(X.shape[0])
        for _ in range(n_passes):
            h = X
            for layer in model.layers[:-1]:
                h = sample_layer(hidden_activation(layer, h), rng)
            out += hidden_activation(top, h)[:, 0]
        out /= n_passes
    else:
        raise ValueError(f"mode must be 'sample' or 'map', got {mode!r}")

    return 1.0 - out if model.flip else out


def propagate_predict(model: DnnModel, x, mode: str = "map",
                      n_passes: int = DEFAULT_N_PASSES,
                      rng: np.random.Generator | None = None) -> float:
    """Posterior estimate for a single input vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("x must be a single vector; use predict_proba for batches")
    return float(predict_proba(model, x[None, :], mode, n_passes, rng)[0])


def resolve_label_flip(model: DnnModel, data) -> bool:
    """True iff the model's thresholded outputs agree with the majority vote
    on fewer than half the rows (ties mean no flip)."""
    X = as_prediction_matrix(data)
    pred = (predict_proba(model, X, mode="map") >= 0.5).astype(np.int8)
    agreement = float((pred == majority_vote(X)).mean())
    return agreement < 0.5


def _holdout_split(n: int, rng: np.random.Generator):
    order = rng.permutation(n)
    n_holdout = max(1, int(round(0.1 * n)))
    return order[n_holdout:], order[:n_holdout]


def random_hyperparameter_search(data, space: HyperSpace,
                                 rng: np.random.Generator,
                                 base_config: TrainConfig | None = None):
    """Sample configurations, train a width-1 RBM per configuration on a 90%
    split, and return ``(best_config, best_score)`` by holdout score.

    The score is the exact mean log-likelihood of the holdout when d allows
    enumeration; for wider data it is the mean free-energy gap between a
    column-shuffled surrogate and the holdout (higher is better in both
    cases).
    """
    X = as_prediction_matrix(data)
    if base_config is None:
        base_config = TrainConfig()
    train_idx, holdout_idx = _holdout_split(X.shape[0], rng)
    train, holdout = X[train_idx], X[holdout_idx]

    enumerable = X.shape[1] <= ENUMERATION_LIMIT
    shuffled = None
    if not enumerable:
        shuffled = np.column_stack(
            [rng.permutation(holdout[:, j]) for j in range(holdout.shape[1])]
        )

    best_config, best_score = None, -np.inf
    for _ in range(space.n_configs):
        candidate = space.sample(rng, base_config)
        candidate = replace(candidate, seed=int(rng.integers(2**63)))
        params = train_rbm(train, 1, candidate)
        if enumerable:
            score = exact_log_likelihood(params, holdout) / holdout.shape[0]
        else:
            score = float(
                np.mean(free_energy(params, shuffled)) - np.mean(free_energy(params, holdout))
            )
        if score > best_score:
            best_config, best_score = candidate, score
    return best_config, float(best_score)


def model_to_document(model: DnnModel, config: TrainConfig | None = None) -> dict:
    """Self-describing dict for serialization: architecture, per-layer
    parameters as row-major arrays, the flip bit, and the training config."""
    doc = {
        "format": "crowdrbm-dnn",
        "version": 1,
        "architecture": list(model.architecture),
        "flip": model.flip,
        "layers": [
            {
                "W": [list(row) for row in layer.W],
                "a": list(layer.a),
                "b": list(layer.b),
            }
            for layer in model.layers
        ],
    }
    if config is not None:
        doc["train_config"] = {
            "learning_rate": config.learning_rate,
            "cd_k": config.cd_k,
            "epochs": config.epochs,
            "batch_size": config.batch_size,
            "momentum": config.momentum,
            "weight_decay": config.weight_decay,
            "seed": config.seed,
            "avg_frac": config.avg_frac,
        }
    return doc


def model_from_document(doc: dict) -> DnnModel:
    """Inverse of ``model_to_document``."""
    if doc.get("format") != "crowdrbm-dnn":
        raise ValueError("not a crowdrbm DNN model document")
    layers = tuple(
        RbmParams(
            W=np.asarray(layer["W"], dtype=np.float64),
            a=np.asarray(layer["a"], dtype=np.float64),
            b=np.asarray(layer["b"], dtype=np.float64),
        )
        for layer in doc["layers"]
    )
    return DnnModel(
        layers=layers,
        flip=bool(doc["flip"]),
        architecture=tuple(doc["architecture"]),
    )


def model_to_json(model: DnnModel, config: TrainConfig | None = None) -> str:
    return json.dumps(model_to_document(model, config), indent=2, sort_keys=True) + "\n"


def model_from_json(text: str) -> DnnModel:
    return model_from_document(json.loads(text))
