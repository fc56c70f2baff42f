"""Deterministic stratified K-fold plans, one per repetition.

Within each class the indices are shuffled by a PCG64 generator seeded from
mix64(master_seed, r) and dealt round-robin to folds.  The round-robin start
rotates with the repetition index so no single fold systematically absorbs the
per-class remainders.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .rng import stream_rng


@dataclass(frozen=True)
class FoldPlan:
    repetition_index: int
    assignments: np.ndarray  # (N,) int32 fold index per sample
    k: int


def make_fold_plan(labels: np.ndarray, k: int, master_seed: int, r: int) -> FoldPlan:
    """Stratified assignment of every sample to one of k validation folds."""
    labels = np.asarray(labels)
    if k < 2:
        raise ValidationError(f"folds: K must be at least 2, got {k}")
    if r < 0:
        raise ValidationError(f"folds: repetition index must be non-negative, got {r}")
    n = labels.shape[0]
    assignments = np.empty(n, dtype=np.int32)
    rng = stream_rng(master_seed, r)
    start = r % k
    for cls in (0, 1):
        members = np.flatnonzero(labels == cls)
        if members.size < k:
            raise ValidationError(
                f"folds: class {cls} has {members.size} members, fewer than K={k}"
            )
        shuffled = rng.permutation(members)
        assignments[shuffled] = (start + np.arange(shuffled.size)) % k
    return FoldPlan(repetition_index=r, assignments=assignments, k=k)


def fold_members(plan: FoldPlan, k: int) -> tuple[np.ndarray, np.ndarray]:
    """(train_indices, validation_indices) for fold k, both sorted ascending."""
    if not 0 <= k < plan.k:
        raise ValidationError(f"folds: fold index {k} out of range [0, {plan.k})")
    validation = np.flatnonzero(plan.assignments == k)
    train = np.flatnonzero(plan.assignments != k)
    return train, validation


def dump_plan(plan: FoldPlan) -> str:
    """Debug dump, one `r,sample_index,fold` line per sample."""
    r = plan.repetition_index
    return "\n".join(f"{r},{i},{int(f)}" for i, f in enumerate(plan.assignments)) + "\n"
