"""Pure-Python (numpy) fold-loss kernel, the fallback backend.

Computes, for one repetition's fold plan, the K validation losses obtained by
fitting the discriminant classifier on each training split and scoring its
validation fold with clipped binary cross-entropy.  The compiled backend in
`_kernel` implements the same contract; results agree to floating-point
rounding (summation order differs between numpy reductions and the C loops).
"""

from __future__ import annotations

import numpy as np

from . import lda
from .errors import ValidationError

BACKEND_NAME = "python"


def fold_losses(
    x: np.ndarray,
    labels: np.ndarray,
    assignments: np.ndarray,
    k_folds: int,
    clip_delta: float,
    shrinkage: float,
) -> np.ndarray:
    losses = np.empty(k_folds, dtype=np.float64)
    for k in range(k_folds):
        val = assignments == k
        if not val.any():
            raise ValidationError(f"folds: fold {k} is empty")
        model = lda.fit_lda(x[~val], labels[~val], shrinkage)
        probs = lda.predict_proba(model, x[val])
        losses[k] = bce_loss(labels[val], probs, clip_delta)
    return losses


def bce_loss(y: np.ndarray, p: np.ndarray, clip_delta: float) -> float:
    """Mean binary cross-entropy in nats, probabilities clipped away from {0,1}."""
    p = np.clip(p, clip_delta, 1.0 - clip_delta)
    terms = np.where(y == 1, -np.log(p), -np.log1p(-p))
    return float(terms.mean())
