"""Synthetic generators for benchmark datasets, pattern-counting posterior
oracles, Bayes-optimal accuracy estimation, and the directed-model joint
verification.

Four generative models are provided: the conditional-independence model, a
depth-2 tree (1-3-15), a sparse layered graph (1-5-5-15), and a thresholded
Gaussian mixture. Each is reproducible given an explicit random generator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .mapping import CondIndParams
from .metrics import balanced_accuracy
from .rbm import RbmParams, enumerate_states, sigmoid

ORACLE_LIMIT = 20


@dataclass(frozen=True)
class TreeModel:
    """Depth-2 tree: root label -> 3 intermediate nodes -> 15 leaves, five
    leaves per intermediate node. Channels are (sensitivity, specificity)
    pairs."""

    pi: float
    mid_channels: np.ndarray   # (3, 2)
    leaf_channels: np.ndarray  # (15, 2)

    def __post_init__(self):
        mid = np.asarray(self.mid_channels, dtype=np.float64)
        leaf = np.asarray(self.leaf_channels, dtype=np.float64)
        if mid.shape != (3, 2):
            raise ValueError(f"mid_channels must be (3, 2), got {mid.shape}")
        if leaf.shape != (15, 2):
            raise ValueError(f"leaf_channels must be (15, 2), got {leaf.shape}")
        for name, arr in (("mid_channels", mid), ("leaf_channels", leaf)):
            if np.any(arr < 0.0) or np.any(arr > 1.0):
                raise ValueError(f"{name} entries must lie in [0, 1]")
        if not 0.0 <= self.pi <= 1.0:
            raise ValueError("pi must lie in [0, 1]")
        mid.setflags(write=False)
        leaf.setflags(write=False)
        object.__setattr__(self, "mid_channels", mid)
        object.__setattr__(self, "leaf_channels", leaf)


@dataclass(frozen=True)
class LayeredGraphModel:
    """Sparse layered graph with layer sizes (1, 5, 5, 15).

    ``adjacency[k]`` is a (child, parent) boolean mask between layers k and
    k+1; ``psi[k]``/``eta[k]`` hold the per-edge channel parameters. A node's
    activation probability is the mean over its parent edges of
    Pr(node=1 | parent value).
    """

    pi: float
    adjacency: tuple   # of bool arrays, shapes (5,1), (5,5), (15,5)
    psi: tuple         # of float arrays, same shapes
    eta: tuple

    def __post_init__(self):
        shapes = [(5, 1), (5, 5), (15, 5)]
        adjacency = tuple(np.asarray(A, dtype=bool) for A in self.adjacency)
        psi = tuple(np.asarray(P, dtype=np.float64) for P in self.psi)
        eta = tuple(np.asarray(E, dtype=np.float64) for E in self.eta)
        if len(adjacency) != 3 or len(psi) != 3 or len(eta) != 3:
            raise ValueError("expected 3 layer transitions")
        for k, shape in enumerate(shapes):
            if adjacency[k].shape != shape:
                raise ValueError(
                    f"adjacency[{k}] must have shape {shape}, got {adjacency[k].shape}"
                )
            if psi[k].shape != shape or eta[k].shape != shape:
                raise ValueError(f"channel arrays for layer {k} must have shape {shape}")
            if not adjacency[k].any(axis=1).all():
                raise ValueError(f"layer {k}: every node needs at least one parent")
        for arrs in (psi, eta):
            for arr in arrs:
                if np.any(arr < 0.0) or np.any(arr > 1.0):
                    raise ValueError("channel probabilities must lie in [0, 1]")
        if not 0.0 <= self.pi <= 1.0:
            raise ValueError("pi must lie in [0, 1]")
        for group in (adjacency, psi, eta):
            for arr in group:
                arr.setflags(write=False)
        object.__setattr__(self, "adjacency", adjacency)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "eta", eta)


@dataclass(frozen=True)
class GaussianMixtureModel:
    """Two-component Gaussian mixture thresholded to binary output.

    Class 1 has mean ``mu``, class 0 has mean ``-mu``; both share ``cov``.
    The observation is 1 where the Gaussian draw is non-negative.
    """

    pi: float
    mu: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=np.float64)
        cov = np.asarray(self.cov, dtype=np.float64)
        if mu.ndim != 1:
            raise ValueError("mu must be a vector")
        d = mu.shape[0]
        if cov.shape != (d, d):
            raise ValueError(f"cov must be ({d}, {d}), got {cov.shape}")
        if not np.allclose(cov, cov.T):
            raise ValueError("cov must be symmetric")
        # raises LinAlgError if not positive definite
        np.linalg.cholesky(cov)
        if not 0.0 <= self.pi <= 1.0:
            raise ValueError("pi must lie in [0, 1]")
        mu.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "cov", cov)


GeneratorModel = Union[CondIndParams, TreeModel, LayeredGraphModel, GaussianMixtureModel]


def _sample_labels(pi: float, n: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.random(n) < pi).astype(np.int8)


def _channel_probs(parent, psi, eta):
    """Pr(child=1 | parent value) for a (sensitivity, specificity) channel."""
    return np.where(parent == 1, psi, 1.0 - eta)


def gen_condind(theta: CondIndParams, n: int, rng: np.random.Generator):
    """Sample (predictions, labels) from the conditional-independence model."""
    y = _sample_labels(theta.pi, n, rng)
    p = np.where(y[:, None] == 1, theta.psi[None, :], 1.0 - theta.eta[None, :])
    x = (rng.random((n, theta.n_classifiers)) < p).astype(np.int8)
    return x, y


def make_paper_condind(rng: np.random.Generator) -> CondIndParams:
    """The benchmark conditional-independence model: 15 classifiers, the
    first five with sensitivity/specificity drawn U[0.5, 1], the remaining
    ten random guesses, balanced prior."""
    psi = np.full(15, 0.5)
    eta = np.full(15, 0.5)
    psi[:5] = rng.uniform(0.5, 1.0, 5)
    eta[:5] = rng.uniform(0.5, 1.0, 5)
    return CondIndParams(psi=psi, eta=eta, pi=0.5)


def gen_tree(model: TreeModel, n: int, rng: np.random.Generator):
    """Sample from the depth-2 tree: label -> intermediates -> leaves."""
    y = _sample_labels(model.pi, n, rng)
    mid = np.empty((n, 3), dtype=np.int8)
    for g in range(3):
        p = _channel_probs(y, model.mid_channels[g, 0], model.mid_channels[g, 1])
        mid[:, g] = rng.random(n) < p
    x = np.empty((n, 15), dtype=np.int8)
    for j in range(15):
        parent = mid[:, j // 5]
        p = _channel_probs(parent, model.leaf_channels[j, 0], model.leaf_channels[j, 1])
        x[:, j] = rng.random(n) < p
    return x, y


def make_paper_tree(rng: np.random.Generator) -> TreeModel:
    """Benchmark tree: intermediate channels U[0.8, 1], leaf channels
    U[0.6, 1], balanced prior."""
    return TreeModel(
        pi=0.5,
        mid_channels=rng.uniform(0.8, 1.0, (3, 2)),
        leaf_channels=rng.uniform(0.6, 1.0, (15, 2)),
    )


def gen_layered_graph(model: LayeredGraphModel, n: int, rng: np.random.Generator):
    """Sample from the layered graph, layer by layer.

    Each node's Bernoulli probability is the average over its parent edges
    of the per-edge channel probability given the sampled parent value.
    """
    y = _sample_labels(model.pi, n, rng)
    prev = y[:, None].astype(np.float64)
    for A, psi, eta in zip(model.adjacency, model.psi, model.eta):
        n_child = A.shape[0]
        cur = np.empty((n, n_child), dtype=np.float64)
        for i in range(n_child):
            parents = np.flatnonzero(A[i])
            probs = [
                _channel_probs(prev[:, j], psi[i, j], eta[i, j]) for j in parents
            ]
            cur[:, i] = rng.random(n) < np.mean(probs, axis=0)
        prev = cur
    return prev.astype(np.int8), y


def make_paper_layered_graph(rng: np.random.Generator) -> LayeredGraphModel:
    """Benchmark layered graph: ~30% of the possible edges present (every
    node keeps at least one parent), per-edge channels U[0.5, 1], balanced
    prior."""
    shapes = [(5, 1), (5, 5), (15, 5)]
    adjacency, psi, eta = [], [], []
    for shape in shapes:
        A = rng.random(shape) < 0.3
        for i in range(shape[0]):
            if not A[i].any():
                A[i, rng.integers(shape[1])] = True
        adjacency.append(A)
        psi.append(rng.uniform(0.5, 1.0, shape))
        eta.append(rng.uniform(0.5, 1.0, shape))
    return LayeredGraphModel(
        pi=0.5, adjacency=tuple(adjacency), psi=tuple(psi), eta=tuple(eta)
    )


def gen_truncated_gaussian(model: GaussianMixtureModel, n: int, rng: np.random.Generator):
    """Sample the thresholded Gaussian mixture: x = 1 where the Gaussian
    draw is >= 0 (sign(0) counts as positive)."""
    d = model.mu.shape[0]
    y = _sample_labels(model.pi, n, rng)
    chol = np.linalg.cholesky(model.cov)
    z = rng.standard_normal((n, d)) @ chol.T
    z += np.where(y[:, None] == 1, model.mu[None, :], -model.mu[None, :])
    return (z >= 0.0).astype(np.int8), y


def make_paper_truncated_gaussian(rng: np.random.Generator) -> GaussianMixtureModel:
    """Benchmark Gaussian mixture: 15 coordinates, means U[0, 1], unit
    variances with 0.5 cross-correlations, balanced prior."""
    cov = np.full((15, 15), 0.5)
    np.fill_diagonal(cov, 1.0)
    return GaussianMixtureModel(pi=0.5, mu=rng.uniform(0.0, 1.0, 15), cov=cov)


def sample_dataset(model: GeneratorModel, n: int, rng: np.random.Generator):
    """Dispatch to the sampler matching the model type."""
    if isinstance(model, CondIndParams):
        return gen_condind(model, n, rng)
    if isinstance(model, TreeModel):
        return gen_tree(model, n, rng)
    if isinstance(model, LayeredGraphModel):
        return gen_layered_graph(model, n, rng)
    if isinstance(model, GaussianMixtureModel):
        return gen_truncated_gaussian(model, n, rng)
    raise TypeError(f"unsupported generator model: {type(model).__name__}")


def model_dim(model: GeneratorModel) -> int:
    """Output dimension (number of classifier columns) of a generator."""
    if isinstance(model, CondIndParams):
        return model.n_classifiers
    if isinstance(model, TreeModel):
        return 15
    if isinstance(model, LayeredGraphModel):
        return model.adjacency[-1].shape[0]
    if isinstance(model, GaussianMixtureModel):
        return model.mu.shape[0]
    raise TypeError(f"unsupported generator model: {type(model).__name__}")


class PosteriorOracle:
    """Monte-Carlo posterior estimate by pattern counting.

    Draws an estimation sample, counts label-1 occurrences per observed bit
    pattern, and answers Pr(Y=1 | X=x) queries by the empirical ratio. A
    pattern never seen in the estimation sample falls back to its
    majority-vote label.
    """

    def __init__(self, model: GeneratorModel, rng: np.random.Generator,
                 n_estimate: int = 10**6):
        d = model_dim(model)
        if d > ORACLE_LIMIT:
            raise ValueError(f"pattern counting limited to d <= {ORACLE_LIMIT}, got d={d}")
        self.d = d
        self._bits = (1 << np.arange(d)).astype(np.int64)
        x, y = sample_dataset(model, n_estimate, rng)
        codes = x.astype(np.int64) @ self._bits
        self._count = np.bincount(codes, minlength=1 << d)
        self._count_pos = np.bincount(codes[y == 1], minlength=1 << d)

    def posterior(self, x) -> np.ndarray | float:
        """Estimated Pr(Y=1 | X=x); accepts a vector or a matrix of rows."""
        x = np.asarray(x)
        if x.shape[-1] != self.d:
            raise ValueError(f"x has length {x.shape[-1]}, oracle expects d={self.d}")
        codes = x.astype(np.int64) @ self._bits
        count = self._count[codes]
        fallback = (2 * x.sum(axis=-1) >= self.d).astype(np.float64)
        post = np.where(
            count > 0, self._count_pos[codes] / np.maximum(count, 1), fallback
        )
        return float(post) if post.ndim == 0 else post


def posterior_oracle(model: GeneratorModel, x, rng: np.random.Generator,
                     n_estimate: int = 10**6) -> np.ndarray | float:
    """One-shot convenience wrapper around ``PosteriorOracle``."""
    return PosteriorOracle(model, rng, n_estimate).posterior(x)


def bayes_optimal_accuracy(model: GeneratorModel, rng: np.random.Generator,
                           n_estimate: int = 10**6, n_eval: int = 10**4) -> float:
    """Balanced accuracy of thresholding the pattern-counting posterior at
    0.5 on a fresh evaluation sample."""
    oracle = PosteriorOracle(model, rng, n_estimate)
    x, y = sample_dataset(model, n_eval, rng)
    pred = (oracle.posterior(x) >= 0.5).astype(np.int8)
    return balanced_accuracy(pred, y)


def directed_joint_tables(a, b, W, U, pi: float):
    """Joint p(X, H) of the directed model Y -> H -> X computed two ways.

    The chain has factorized sigmoid channels p(X_i=1|H) = sigma(a_i + W_i.H)
    and p(H_j=1|Y=y) = sigma(b_j + U_j y). Returns ``(direct, closed_form)``,
    both (2^d, 2^m) tables: the direct construction marginalizes Y through
    the channel factorization; the closed form evaluates
    exp(a'X + X'WH + b'H) * Z(H) with Z(H) carrying the X-normalization and
    the Y-mixture of the H-normalization.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    U = np.asarray(U, dtype=np.float64)
    d, m = W.shape
    if a.shape != (d,) or b.shape != (m,) or U.shape != (m,):
        raise ValueError("parameter shapes are inconsistent with W")
    if d > 6 or m > 4:
        raise ValueError(f"brute-force verification limited to d <= 6, m <= 4, got d={d}, m={m}")
    if not 0.0 <= pi <= 1.0:
        raise ValueError("pi must lie in [0, 1]")

    xs = enumerate_states(d)   # (2^d, d)
    hs = enumerate_states(m)   # (2^m, m)
    prior = np.array([1.0 - pi, pi])

    # direct: sum_y p(y) p(H|y) p(X|H)
    p_x1_given_h = sigmoid(a[None, :] + hs @ W.T)          # (2^m, d)
    p_x_given_h = np.prod(
        np.where(xs[:, None, :] == 1.0, p_x1_given_h[None, :, :],
                 1.0 - p_x1_given_h[None, :, :]),
        axis=2,
    )                                                      # (2^d, 2^m)
    p_h1_given_y = sigmoid(b[None, :] + np.outer([0.0, 1.0], U))  # (2, m)
    p_h_given_y = np.prod(
        np.where(hs[None, :, :] == 1.0, p_h1_given_y[:, None, :],
                 1.0 - p_h1_given_y[:, None, :]),
        axis=2,
    )                                                      # (2, 2^m)
    direct = p_x_given_h * (prior @ p_h_given_y)[None, :]

    # closed form: exp(a'X + X'WH + b'H) * Z(H)
    core = np.exp(xs @ a[:, None] + xs @ W @ hs.T + (hs @ b)[None, :])
    x_norm = np.exp(xs @ a[:, None] + xs @ W @ hs.T).sum(axis=0)   # (2^m,)
    h_norm_y = np.exp((hs @ b)[None, :] + np.outer([0.0, 1.0], hs @ U)).sum(axis=1)
    z_h = (prior / h_norm_y) @ np.exp(np.outer([0.0, 1.0], hs @ U))  # (2^m,)
    closed = core * (z_h / x_norm)[None, :]

    return direct, closed


def verify_lemma3(a, b, W, U, pi: float) -> float:
    """Max absolute gap between the two joint constructions of the directed
    model (brute force, d <= 6, m <= 4)."""
    direct, closed = directed_joint_tables(a, b, W, U, pi)
    return float(np.abs(direct - closed).max())
