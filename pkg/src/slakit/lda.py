"""Binary linear discriminant analysis with shrunk pooled covariance.

The pooled within-class covariance gets a convex shrink toward the scaled
identity, Sigma' = (1-lam)*Sigma + lam*(trace(Sigma)/d)*I, so stratified folds
on imbalanced data cannot hand us a singular scatter.  Inversion goes through
a Cholesky factorization; a failed factorization or an extreme diagonal ratio
raises NumericalError instead of silently falling back to a pseudo-inverse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError

# Cholesky-diagonal condition proxy above which the shrunk covariance is
# treated as numerically singular.
CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class LdaModel:
    mean_pos: np.ndarray  # (d,)
    mean_neg: np.ndarray  # (d,)
    pooled_precision: np.ndarray  # (d, d) symmetric positive-definite
    log_prior_ratio: float  # log(n_pos / n_neg)


def fit_lda(x: np.ndarray, y: np.ndarray, shrinkage: float = 1e-4) -> LdaModel:
    """Fit class means, shrunk pooled covariance, and empirical priors."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValidationError("lda: x must be (M, d) with one label per row")
    m, d = x.shape
    if m <= 2:
        raise ValidationError(f"lda: need more than 2 training samples, got {m}")
    if not 0.0 <= shrinkage <= 1.0:
        raise ValidationError(f"lda: shrinkage must be in [0,1], got {shrinkage}")
    pos = y == 1
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("lda: single-class fold")
    mean_pos = x[pos].mean(axis=0)
    mean_neg = x[~pos].mean(axis=0)
    centered = x - np.where(pos[:, None], mean_pos, mean_neg)
    cov = centered.T @ centered / (m - 2)
    shrunk = (1.0 - shrinkage) * cov + shrinkage * (np.trace(cov) / d) * np.eye(d)
    chol = _cholesky(shrunk)
    inv_chol = np.linalg.inv(chol)
    precision = inv_chol.T @ inv_chol
    precision = (precision + precision.T) / 2.0
    return LdaModel(
        mean_pos=mean_pos,
        mean_neg=mean_neg,
        pooled_precision=precision,
        log_prior_ratio=math.log(n_pos / n_neg),
    )


def _cholesky(shrunk: np.ndarray) -> np.ndarray:
    try:
        chol = np.linalg.cholesky(shrunk)
    except np.linalg.LinAlgError:
        raise NumericalError("lda: singular covariance (Cholesky factorization failed)")
    diag = np.diag(chol)
    if (diag.max() / diag.min()) ** 2 > CONDITION_LIMIT:
        raise NumericalError("lda: singular covariance (condition estimate above 1e12)")
    return chol


def decision_weights(model: LdaModel) -> tuple[np.ndarray, float]:
    """Linear decision function (w, b) with p = sigmoid(w.x + b)."""
    w = model.pooled_precision @ (model.mean_pos - model.mean_neg)
    b = -0.5 * float((model.mean_pos + model.mean_neg) @ w) + model.log_prior_ratio
    return w, b


def predict_proba(model: LdaModel, x: np.ndarray) -> np.ndarray:
    """Positive-class posteriors, kept strictly inside (0, 1)."""
    x = np.asarray(x, dtype=np.float64)
    d = model.mean_pos.shape[0]
    if x.ndim != 2 or x.shape[1] != d:
        raise ValidationError(f"lda: dimension mismatch (model d={d}, input {x.shape})")
    w, b = decision_weights(model)
    t = x @ w + b
    with np.errstate(over="ignore"):
        p = 1.0 / (1.0 + np.exp(-t))
    return np.clip(p, 1e-300, 1.0 - 1e-16)
