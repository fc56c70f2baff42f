"""Principal-component projection fitted once on the full feature matrix.

The projection is unsupervised, so fitting on the whole corpus before the
cross-validation loop leaks no label information.  Eigenvector signs are
pinned (largest-magnitude entry non-negative) so the model is bit-identical
across runs and platforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError, ValidationError


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray  # (D,) per-feature centering offsets
    projection: np.ndarray  # (D, d), orthonormal columns
    explained_variance: np.ndarray  # (d,) non-increasing, non-negative


def fit_pca(features: np.ndarray, d: int) -> PcaModel:
    """Top-d eigenvectors of the unbiased sample covariance, eigenvalues descending."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ValidationError("pca: features must be a 2-D matrix")
    n, dim = x.shape
    if not np.isfinite(x).all():
        raise ValidationError("pca: non-finite feature values")
    if d < 1 or d > min(n, dim):
        raise ValidationError(f"pca: d={d} exceeds rank budget min(N,D)={min(n, dim)}")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (n - 1) if n > 1 else np.zeros((dim, dim))
    eigvals, eigvecs = np.linalg.eigh(cov)
    if eigvals[-1] <= 0.0:
        raise ValidationError("pca: degenerate feature matrix (zero total variance)")
    order = np.argsort(eigvals)[::-1][:d]
    values = np.clip(eigvals[order], 0.0, None)
    vectors = eigvecs[:, order]
    # Pin each eigenvector's sign: largest-magnitude entry made non-negative.
    for j in range(d):
        pivot = int(np.argmax(np.abs(vectors[:, j])))
        if vectors[pivot, j] < 0:
            vectors[:, j] = -vectors[:, j]
    return PcaModel(mean=mean, projection=np.ascontiguousarray(vectors), explained_variance=values)


def transform(model: PcaModel, features: np.ndarray) -> np.ndarray:
    """Center by the fitted mean and project: (x - mean) @ P."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.projection.shape[0]:
        raise ValidationError(
            f"pca: dimension mismatch (model D={model.projection.shape[0]}, "
            f"input D={x.shape[1] if x.ndim == 2 else 'not 2-D'})"
        )
    return (x - model.mean) @ model.projection


def save_model(path: str | Path, model: PcaModel) -> None:
    """Audit dump: flat key-value text, projection in row-major order."""
    dim, d = model.projection.shape
    lines = [
        f"D = {dim}",
        f"d = {d}",
        "mean = " + " ".join(repr(float(v)) for v in model.mean),
        "projection = " + " ".join(repr(float(v)) for v in model.projection.ravel()),
        "explained_variance = " + " ".join(repr(float(v)) for v in model.explained_variance),
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def load_model(path: str | Path) -> PcaModel:
    try:
        fields = dict(
            line.split(" = ", 1) for line in Path(path).read_text().splitlines() if line
        )
        dim, d = int(fields["D"]), int(fields["d"])
        mean = np.array([float(v) for v in fields["mean"].split()])
        proj = np.array([float(v) for v in fields["projection"].split()]).reshape(dim, d)
        ev = np.array([float(v) for v in fields["explained_variance"].split()])
    except (OSError, KeyError, ValueError) as exc:
        raise InputError(f"pca: malformed model file {path}: {exc}")
    return PcaModel(mean=mean, projection=proj, explained_variance=ev)
