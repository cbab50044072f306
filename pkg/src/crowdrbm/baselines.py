"""Reference label aggregators: majority vote, Dawid-Skene EM, and the
spectral meta-learner."""

from __future__ import annotations

import warnings

import numpy as np

from .mapping import CondIndParams, clamp_probability, condind_posterior
from .metrics import flip_condind
from .rbm import as_prediction_matrix


def majority_vote(data) -> np.ndarray:
    """Per-row majority label; exact ties (even d) resolve to 1."""
    X = as_prediction_matrix(data)
    return (2 * X.sum(axis=1) >= X.shape[1]).astype(np.int8)


def _observed_log_likelihood(theta: CondIndParams, X: np.ndarray) -> float:
    psi = clamp_probability(theta.psi, warn=False)
    eta = clamp_probability(theta.eta, warn=False)
    pi = clamp_probability(theta.pi, warn=False)
    log_p1 = np.log(pi) + X @ np.log(psi) + (1.0 - X) @ np.log1p(-psi)
    log_p0 = np.log1p(-pi) + X @ np.log1p(-eta) + (1.0 - X) @ np.log(eta)
    return float(np.logaddexp(log_p0, log_p1).sum())


def ds_em(data, max_iters: int = 100, tol: float = 1e-8):
    """EM for the conditional-independence model.

    Soft labels start at the majority vote; each iteration re-estimates the
    per-classifier channels and the prior from the current posteriors, then
    updates the posteriors. Stops when the observed-data log-likelihood
    improves by less than ``tol``. The output orientation is aligned with
    the majority vote. Returns ``(theta, posterior)``.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be a positive integer")
    if tol <= 0:
        raise ValueError("tol must be positive")
    X = as_prediction_matrix(data)
    n, d = X.shape
    if d < 3:
        warnings.warn(
            f"d={d} < 3: the conditional-independence model is not "
            "identifiable in general; proceeding anyway",
            stacklevel=2,
        )

    mv = majority_vote(X)
    q = mv.astype(np.float64)
    theta = None
    ll_prev = -np.inf
    for _ in range(max_iters):
        s1 = q.sum()
        s0 = n - s1
        psi = clamp_probability((q @ X) / max(s1, 1e-300), warn=False)
        eta = clamp_probability(((1.0 - q) @ (1.0 - X)) / max(s0, 1e-300), warn=False)
        pi = clamp_probability(q.mean(), warn=False)
        theta = CondIndParams(psi=psi, eta=eta, pi=pi)
        q = condind_posterior(theta, X)
        ll = _observed_log_likelihood(theta, X)
        if ll - ll_prev < tol:
            break
        ll_prev = ll

    hard = (q >= 0.5).astype(np.int8)
    if (hard == mv).mean() < 0.5:
        theta = flip_condind(theta)
        q = 1.0 - q
    return theta, q


def sml_predict(data):
    """Spectral meta-learner: weight classifiers by the leading eigenvector
    of the rank-one off-diagonal structure of the +-1 prediction covariance.

    The diagonal of the covariance is treated as unknown: it starts at the
    row-wise maximum absolute off-diagonal entry and is refined by
    alternating a power-iteration eigenvector step with a diagonal update.
    Zero-variance columns get weight 0 with a warning. Returns
    ``(weights, labels)``; the weight sign is aligned with the majority vote.
    """
    X = as_prediction_matrix(data)
    n, d = X.shape
    if d < 3:
        raise ValueError(f"spectral meta-learner requires d >= 3, got d={d}")
    z = 2.0 * X - 1.0
    variances = z.var(axis=0)
    degenerate = variances == 0.0
    if degenerate.any():
        warnings.warn(
            f"columns {np.flatnonzero(degenerate).tolist()} have zero "
            "variance; their weights are set to 0",
            stacklevel=2,
        )
    active = np.flatnonzero(~degenerate)
    if active.size < 2:
        raise ValueError("need at least two non-constant columns")

    zc = z[:, active] - z[:, active].mean(axis=0)
    Q = zc.T @ zc / max(n - 1, 1)
    off = Q - np.diag(np.diag(Q))
    R = off + np.diag(np.abs(off).max(axis=1))

    k = active.size
    v = np.ones(k) / np.sqrt(k)
    eigval = 1.0
    for _ in range(10):
        for _ in range(200):
            u = R @ v
            norm = np.linalg.norm(u)
            if norm == 0.0:
                break
            v = u / norm
        eigval = float(v @ R @ v)
        R = off + np.diag(eigval * v**2)

    weights = np.zeros(d)
    weights[active] = v

    scores = z @ weights
    labels = (scores >= 0.0).astype(np.int8)
    mv = majority_vote(X)
    if (labels == mv).mean() < 0.5:
        weights = -weights
        labels = 1 - labels
    return weights, labels
