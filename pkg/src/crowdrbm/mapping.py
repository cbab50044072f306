"""Bijection between single-hidden-node RBMs and the conditional-independence
(Dawid-Skene) model, with posterior computation on both sides and an
enumeration oracle for equivalence testing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .rbm import (
    RbmParams,
    _check_visible,
    enumerate_states,
    sigmoid,
    softplus,
)

# Sensitivities/specificities/prior are clamped away from {0, 1} before any
# logit so the parameter map stays numerically total.
PROB_CLAMP = 1e-6

JOINT_TABLE_LIMIT = 12


@dataclass(frozen=True)
class CondIndParams:
    """Conditional-independence model parameters.

    ``psi[i]`` = Pr(X_i=1 | Y=1) (sensitivity), ``eta[i]`` = Pr(X_i=0 | Y=0)
    (specificity), ``pi`` = Pr(Y=1).
    """

    psi: np.ndarray
    eta: np.ndarray
    pi: float

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=np.float64)
        eta = np.asarray(self.eta, dtype=np.float64)
        if psi.ndim != 1 or eta.ndim != 1:
            raise ValueError("psi and eta must be vectors")
        if psi.shape != eta.shape:
            raise ValueError(
                f"psi and eta lengths differ: {psi.shape[0]} vs {eta.shape[0]}"
            )
        if psi.shape[0] < 1:
            raise ValueError("need at least one classifier")
        for name, arr in (("psi", psi), ("eta", eta)):
            if np.any(arr < 0.0) or np.any(arr > 1.0) or not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} entries must lie in [0, 1]")
        if not 0.0 <= self.pi <= 1.0:
            raise ValueError("pi must lie in [0, 1]")
        psi.setflags(write=False)
        eta.setflags(write=False)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "pi", float(self.pi))

    @property
    def n_classifiers(self) -> int:
        return self.psi.shape[0]


def clamp_probability(p, warn: bool = True):
    """Clamp probabilities to [1e-6, 1 - 1e-6], warning if anything moved."""
    arr = np.asarray(p, dtype=np.float64)
    clamped = np.clip(arr, PROB_CLAMP, 1.0 - PROB_CLAMP)
    if warn and np.any(clamped != arr):
        warnings.warn(
            "probabilities at or near 0/1 were clamped to "
            f"[{PROB_CLAMP}, {1 - PROB_CLAMP}]",
            stacklevel=2,
        )
    return clamped if arr.ndim else float(clamped)


def _logit(p):
    return np.log(p) - np.log1p(-p)


def _require_single_hidden(params: RbmParams):
    if params.n_hidden != 1:
        raise ValueError(
            f"this operation requires a single hidden unit, got m={params.n_hidden}"
        )


def rbm_to_condind(params: RbmParams) -> CondIndParams:
    """Map single-hidden-node RBM parameters to the equivalent
    conditional-independence parameters.

    psi_i = sigma(a_i + w_i), eta_i = 1 - sigma(a_i), and the prior is the
    hidden marginal, evaluated through the product closed form of the
    partition sums (sum_x exp(c'x) = prod_i (1 + exp(c_i))) in log space.
    """
    _require_single_hidden(params)
    w = params.W[:, 0]
    psi = sigmoid(params.a + w)
    eta = 1.0 - sigmoid(params.a)
    pi = float(sigmoid(
        params.b[0] + softplus(params.a + w).sum() - softplus(params.a).sum()
    ))
    return CondIndParams(psi=psi, eta=eta, pi=pi)


def condind_to_rbm(theta: CondIndParams) -> RbmParams:
    """Inverse of ``rbm_to_condind``; clamps boundary probabilities first."""
    psi = clamp_probability(theta.psi)
    eta = clamp_probability(theta.eta)
    pi = clamp_probability(theta.pi)
    a = -_logit(eta)
    w = _logit(psi) - a
    b = _logit(pi) + softplus(a).sum() - softplus(a + w).sum()
    return RbmParams(W=w[:, None], a=a, b=np.array([b]))


def condind_posterior(theta: CondIndParams, x) -> np.ndarray | float:
    """Pr(Y=1 | X=x) under the conditional-independence model, in log space.

    Accepts a vector (returns a float) or a matrix of rows.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != theta.n_classifiers:
        raise ValueError(
            f"x has length {x.shape[-1]}, model expects d={theta.n_classifiers}"
        )
    psi = clamp_probability(theta.psi, warn=False)
    eta = clamp_probability(theta.eta, warn=False)
    pi = clamp_probability(theta.pi, warn=False)
    log_p1 = np.log(pi) + x @ np.log(psi) + (1.0 - x) @ np.log1p(-psi)
    log_p0 = np.log1p(-pi) + x @ np.log1p(-eta) + (1.0 - x) @ np.log(eta)
    post = sigmoid(log_p1 - log_p0)
    return float(post) if post.ndim == 0 else post


def rbm_posterior(params: RbmParams, x) -> np.ndarray | float:
    """p(H=1 | X=x) of a single-hidden-node RBM: sigma(b + x'w)."""
    _require_single_hidden(params)
    x = _check_visible(params, x)
    post = sigmoid(params.b[0] + x @ params.W[:, 0])
    return float(post) if post.ndim == 0 else post


def joint_table(model: RbmParams | CondIndParams) -> np.ndarray:
    """Exhaustive joint p(X=x, label=y) as a (2^d, 2) table (d <= 12).

    Row r holds the state with bit j of r in column j (the
    ``enumerate_states`` order); columns index the label value.
    """
    if isinstance(model, RbmParams):
        _require_single_hidden(model)
        d = model.n_visible
        if d > JOINT_TABLE_LIMIT:
            raise ValueError(
                f"joint table enumeration limited to d <= {JOINT_TABLE_LIMIT}, got d={d}"
            )
        states = enumerate_states(d)
        w = model.W[:, 0]
        log_unnorm = np.stack(
            [states @ model.a, states @ model.a + model.b[0] + states @ w],
            axis=1,
        )
        return np.exp(log_unnorm - logsumexp(log_unnorm))
    if isinstance(model, CondIndParams):
        d = model.n_classifiers
        if d > JOINT_TABLE_LIMIT:
            raise ValueError(
                f"joint table enumeration limited to d <= {JOINT_TABLE_LIMIT}, got d={d}"
            )
        states = enumerate_states(d)
        p1 = model.pi * np.prod(
            np.where(states == 1.0, model.psi, 1.0 - model.psi), axis=1
        )
        p0 = (1.0 - model.pi) * np.prod(
            np.where(states == 1.0, 1.0 - model.eta, model.eta), axis=1
        )
        return np.stack([p0, p1], axis=1)
    raise TypeError(f"unsupported model type: {type(model).__name__}")
