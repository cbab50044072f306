"""Core RBM machinery: energy, conditionals, exact likelihood, CD-k training.

All operations are pure functions of their inputs plus an explicitly passed
``numpy.random.Generator``; parameter records are treated as immutable once
returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit, logsumexp

# Logits are clipped here before the logistic function so that activation
# probabilities stay strictly inside (0, 1) in float64.
LOGIT_CLIP = 30.0

# Exact likelihood enumerates 2^d visible states; refuse beyond this.
ENUMERATION_LIMIT = 20


def sigmoid(z: np.ndarray | float) -> np.ndarray:
    """Overflow-safe logistic function with logits clipped to [-30, 30]."""
    return expit(np.clip(z, -LOGIT_CLIP, LOGIT_CLIP))


def softplus(z: np.ndarray | float) -> np.ndarray:
    """log(1 + exp(z)), computed without overflow (no clipping)."""
    return np.logaddexp(0.0, z)


def _as_float_array(x, name: str, ndim: int) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class RbmParams:
    """RBM parameters: weights ``W`` (d x m), visible biases ``a`` (d),
    hidden biases ``b`` (m)."""

    W: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        W = _as_float_array(self.W, "W", 2)
        a = _as_float_array(self.a, "a", 1)
        b = _as_float_array(self.b, "b", 1)
        d, m = W.shape
        if d < 1 or m < 1:
            raise ValueError(f"W must be at least 1x1, got {W.shape}")
        if a.shape != (d,):
            raise ValueError(f"a has length {a.shape[0]}, expected {d} to match W")
        if b.shape != (m,):
            raise ValueError(f"b has length {b.shape[0]}, expected {m} to match W")
        for name, arr in (("W", W), ("a", a), ("b", b)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
        for arr in (W, a, b):
            arr.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n_visible(self) -> int:
        return self.W.shape[0]

    @property
    def n_hidden(self) -> int:
        return self.W.shape[1]


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for minibatch CD-k training.

    ``momentum`` is the late-stage coefficient; the first five epochs run at
    min(0.5, momentum). ``avg_frac`` > 0 returns parameters averaged over the
    trailing fraction of updates (iterate averaging), which suppresses
    gradient noise in the learned weights.
    """

    learning_rate: float = 0.05
    cd_k: int = 1
    epochs: int = 50
    batch_size: int = 100
    momentum: float = 0.9
    weight_decay: float = 2e-4
    seed: int = 0
    avg_frac: float = 0.0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.cd_k < 1:
            raise ValueError("cd_k must be a positive integer")
        if self.epochs < 1:
            raise ValueError("epochs must be a positive integer")
        if self.batch_size < 1:
            raise ValueError("batch_size must be a positive integer")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must lie in [0, 1)")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be non-negative")
        if not 0.0 <= self.avg_frac < 1.0:
            raise ValueError("avg_frac must lie in [0, 1)")


@dataclass(frozen=True)
class CdGradient:
    """CD-k gradient estimate (dW, da, db), averaged over the batch."""

    dW: np.ndarray
    da: np.ndarray
    db: np.ndarray


def as_prediction_matrix(data) -> np.ndarray:
    """Validate an n x d binary prediction matrix and return it as float64."""
    X = np.asarray(data, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"prediction matrix must be 2-dimensional, got shape {X.shape}")
    n, d = X.shape
    if n < 1 or d < 1:
        raise ValueError(f"prediction matrix must be at least 1x1, got {X.shape}")
    if not np.all((X == 0.0) | (X == 1.0)):
        raise ValueError("prediction matrix entries must all be 0 or 1")
    return X


def _check_visible(params: RbmParams, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.n_visible:
        raise ValueError(
            f"visible vector has length {x.shape[-1]}, "
            f"model expects d={params.n_visible}"
        )
    return x


def _check_hidden(params: RbmParams, h) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64)
    if h.shape[-1] != params.n_hidden:
        raise ValueError(
            f"hidden vector has length {h.shape[-1]}, "
            f"model expects m={params.n_hidden}"
        )
    return h


def energy(params: RbmParams, x, h) -> float:
    """Energy -(a'x + b'h + x'Wh) of a joint configuration."""
    x = _check_visible(params, x)
    h = _check_hidden(params, h)
    return float(-(params.a @ x + params.b @ h + x @ params.W @ h))


def hidden_activation(params: RbmParams, x) -> np.ndarray:
    """p(H_j = 1 | x) for every hidden unit; accepts a vector or a matrix
    of rows."""
    x = _check_visible(params, x)
    return sigmoid(params.b + x @ params.W)


def visible_activation(params: RbmParams, h) -> np.ndarray:
    """p(X_i = 1 | h) for every visible unit; accepts a vector or a matrix
    of rows."""
    h = _check_hidden(params, h)
    return sigmoid(params.a + h @ params.W.T)


def sample_layer(activations, rng: np.random.Generator) -> np.ndarray:
    """Independent Bernoulli draw per unit; returns 0/1 floats."""
    p = np.asarray(activations, dtype=np.float64)
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("activations must lie in [0, 1]")
    return (rng.random(p.shape) < p).astype(np.float64)


def free_energy(params: RbmParams, x) -> np.ndarray | float:
    """F(x) = -a'x - sum_j softplus(b_j + x'W_.j).

    The visible marginal satisfies p(x) = exp(-F(x)) / sum_x' exp(-F(x')).
    Accepts a vector (returns a float) or a matrix of rows.
    """
    x = _check_visible(params, x)
    F = -(x @ params.a) - softplus(params.b + x @ params.W).sum(axis=-1)
    return float(F) if F.ndim == 0 else F


def enumerate_states(d: int) -> np.ndarray:
    """All 2^d binary vectors as a (2^d, d) matrix; bit j of the row index
    is column j."""
    idx = np.arange(1 << d, dtype=np.int64)
    return ((idx[:, None] >> np.arange(d)) & 1).astype(np.float64)


def log_partition(params: RbmParams) -> float:
    """log Z by exact enumeration of all 2^d visible states (d <= 20)."""
    d = params.n_visible
    if d > ENUMERATION_LIMIT:
        raise ValueError(
            f"exact enumeration limited to d <= {ENUMERATION_LIMIT}, got d={d}"
        )
    return float(logsumexp(-free_energy(params, enumerate_states(d))))


def exact_log_likelihood(params: RbmParams, data) -> float:
    """Total log-likelihood of the rows of ``data``, with the partition
    function enumerated exactly (refuses d > 20)."""
    X = as_prediction_matrix(data)
    _check_visible(params, X)
    log_z = log_partition(params)
    return float(np.sum(-free_energy(params, X) - log_z))


def cd_step(params: RbmParams, batch, k: int, rng: np.random.Generator) -> CdGradient:
    """One CD-k gradient estimate on a batch.

    Positive phase clamps the data; the negative phase runs k alternating
    Gibbs steps started at the data, sampling both layers, and evaluates the
    statistics at the sampled visibles with their hidden activations.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    X = as_prediction_matrix(batch)
    _check_visible(params, X)
    n = X.shape[0]

    ph_pos = hidden_activation(params, X)
    x_neg = X
    ph_neg = ph_pos
    for _ in range(k):
        h = sample_layer(ph_neg, rng)
        x_neg = sample_layer(visible_activation(params, h), rng)
        ph_neg = hidden_activation(params, x_neg)

    dW = (X.T @ ph_pos - x_neg.T @ ph_neg) / n
    da = (X.sum(axis=0) - x_neg.sum(axis=0)) / n
    db = (ph_pos.sum(axis=0) - ph_neg.sum(axis=0)) / n
    return CdGradient(dW=dW, da=da, db=db)


def _initial_params(X: np.ndarray, m: int, rng: np.random.Generator) -> tuple:
    d = X.shape[1]
    W = rng.normal(0.0, 0.01, size=(d, m))
    mean = np.clip(X.mean(axis=0), 1e-12, 1.0 - 1e-12)
    a = np.clip(np.log(mean) - np.log1p(-mean), -LOGIT_CLIP, LOGIT_CLIP)
    b = np.zeros(m)
    return W, a, b


def train_rbm(data, m: int, config: TrainConfig) -> RbmParams:
    """Train an RBM with ``m`` hidden units by minibatch CD-k.

    Visible biases start at the logit of the empirical column means, weights
    at N(0, 0.01^2), hidden biases at zero. Updates use momentum (0.5 for the
    first five epochs, then ``config.momentum``) and L2 decay on the weights.
    Deterministic given ``config.seed``.
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    X = as_prediction_matrix(data)
    n = X.shape[0]
    rng = np.random.default_rng(config.seed)
    W, a, b = _initial_params(X, m, rng)
    vW = np.zeros_like(W)
    va = np.zeros_like(a)
    vb = np.zeros_like(b)

    n_batches = (n + config.batch_size - 1) // config.batch_size
    total_updates = config.epochs * n_batches
    avg_start = total_updates - int(round(config.avg_frac * total_updates))
    W_sum, a_sum, b_sum = np.zeros_like(W), np.zeros_like(a), np.zeros_like(b)
    n_avg = 0
    update = 0

    for epoch in range(config.epochs):
        mom = min(0.5, config.momentum) if epoch < 5 else config.momentum
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            xb = X[order[start:start + config.batch_size]]
            bs = xb.shape[0]

            ph = sigmoid(b + xb @ W)
            x_neg, ph_neg = xb, ph
            for _ in range(config.cd_k):
                h = (rng.random(ph_neg.shape) < ph_neg).astype(np.float64)
                pv = sigmoid(a + h @ W.T)
                x_neg = (rng.random(pv.shape) < pv).astype(np.float64)
                ph_neg = sigmoid(b + x_neg @ W)

            gW = (xb.T @ ph - x_neg.T @ ph_neg) / bs - config.weight_decay * W
            ga = (xb.sum(axis=0) - x_neg.sum(axis=0)) / bs
            gb = (ph.sum(axis=0) - ph_neg.sum(axis=0)) / bs

            vW = mom * vW + config.learning_rate * gW
            va = mom * va + config.learning_rate * ga
            vb = mom * vb + config.learning_rate * gb
            W = W + vW
            a = a + va
            b = b + vb

            update += 1
            if update > avg_start:
                W_sum += W
                a_sum += a
                b_sum += b
                n_avg += 1

    if n_avg > 0:
        return RbmParams(W=W_sum / n_avg, a=a_sum / n_avg, b=b_sum / n_avg)
    return RbmParams(W=W, a=a, b=b)
