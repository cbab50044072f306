"""Evaluation helpers: balanced accuracy, conditional correlations, and
parameter-recovery summaries."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .mapping import CondIndParams


def balanced_accuracy(pred, truth) -> float:
    """Mean of the per-class recalls over the two classes."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: pred {pred.shape} vs truth {truth.shape}")
    ones = truth == 1
    zeros = truth == 0
    if not ones.any() or not zeros.any():
        raise ValueError("truth must contain both classes")
    return float(0.5 * (pred[ones] == 1).mean() + 0.5 * (pred[zeros] == 0).mean())


def conditional_correlation(data, labels, y: int) -> np.ndarray:
    """Pearson correlation of the columns of ``data`` restricted to rows
    whose label equals ``y``.

    Columns that are constant within the class get zero correlation (and a
    zero diagonal entry) by convention, with a warning.
    """
    X = np.asarray(data, dtype=np.float64)
    labels = np.asarray(labels)
    rows = X[labels == y]
    if rows.shape[0] < 2:
        raise ValueError(f"class {y} has fewer than 2 rows")
    centered = rows - rows.mean(axis=0)
    std = centered.std(axis=0)
    constant = std == 0.0
    if constant.any():
        warnings.warn(
            f"columns {np.flatnonzero(constant).tolist()} are constant within "
            f"class {y}; their correlations are set to 0",
            stacklevel=2,
        )
    safe_std = np.where(constant, 1.0, std)
    normed = centered / safe_std
    corr = normed.T @ normed / rows.shape[0]
    corr[constant, :] = 0.0
    corr[:, constant] = 0.0
    np.fill_diagonal(corr, np.where(constant, 0.0, 1.0))
    return corr


@dataclass(frozen=True)
class RecoveryReport:
    """Error summary of an estimated conditional-independence model against
    the truth, after resolving the global label flip."""

    mae: float
    max_error: float
    flipped: bool


def flip_condind(theta: CondIndParams) -> CondIndParams:
    """The label-flipped counterpart: psi' = 1 - eta, eta' = 1 - psi,
    pi' = 1 - pi."""
    return CondIndParams(psi=1.0 - theta.eta, eta=1.0 - theta.psi, pi=1.0 - theta.pi)


def parameter_recovery_report(
    theta_hat: CondIndParams, theta_true: CondIndParams
) -> RecoveryReport:
    """Compare an estimate against the truth under both label orientations
    and report the better one."""
    if theta_hat.n_classifiers != theta_true.n_classifiers:
        raise ValueError(
            f"dimension mismatch: estimate d={theta_hat.n_classifiers}, "
            f"truth d={theta_true.n_classifiers}"
        )

    def errors(th: CondIndParams) -> np.ndarray:
        return np.abs(
            np.concatenate([th.psi - theta_true.psi, th.eta - theta_true.eta])
        )

    direct = errors(theta_hat)
    flipped = errors(flip_condind(theta_hat))
    if flipped.mean() < direct.mean():
        return RecoveryReport(
            mae=float(flipped.mean()), max_error=float(flipped.max()), flipped=True
        )
    return RecoveryReport(
        mae=float(direct.mean()), max_error=float(direct.max()), flipped=False
    )
