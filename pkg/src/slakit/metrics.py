"""Detection metrics and convergence monitoring.

AUROC uses the rank-sum (Mann-Whitney) formulation with midranks for ties, so
it is exact without any curve interpolation.  Convergence is judged either on
the AUROC trend (simulation runs, where ground truth exists) or on the
rank stability of consecutive score snapshots (audit runs).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass
class AurocTrace:
    """(repetitions_done, auroc_sla, auroc_recov) checkpoints, reps strictly increasing."""

    checkpoints: list[tuple[int, float, float]]

    def append(self, repetitions: int, auroc_sla: float, auroc_recov: float) -> None:
        if self.checkpoints and repetitions <= self.checkpoints[-1][0]:
            raise ValidationError("metrics: trace repetitions must be strictly increasing")
        self.checkpoints.append((repetitions, auroc_sla, auroc_recov))

    def sla_values(self) -> list[float]:
        return [c[1] for c in self.checkpoints]


@dataclass(frozen=True)
class ScoreDistributionSummary:
    clean_mean: float
    clean_std: float
    noisy_mean: float
    noisy_std: float
    overlap_coefficient: float


@dataclass(frozen=True)
class StoppingPolicy:
    mode: str = "simulation"  # or "audit"
    window: int = 3
    tau_auroc: float = 0.005
    tau_rank: float = 0.999


def midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing the mean rank of their group."""
    values = np.asarray(values)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0], dtype=np.float64)
    i = 0
    while i < values.shape[0]:
        j = i
        while j + 1 < values.shape[0] and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def compute_auroc(scores: np.ndarray, positives: np.ndarray) -> float:
    """P(random positive outranks random negative), ties counted one half."""
    scores = np.asarray(scores, dtype=np.float64)
    positives = np.asarray(positives, dtype=bool)
    if scores.shape != positives.shape:
        raise ValidationError("metrics: scores/positives length mismatch")
    n_pos = int(positives.sum())
    n_neg = int(positives.shape[0] - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("metrics: AUROC needs both a positive and a negative group")
    ranks = midranks(scores)
    u = ranks[positives].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def summarize_distributions(scores: np.ndarray, flip_mask: np.ndarray) -> ScoreDistributionSummary:
    """Group moments plus the histogram-intersection overlap of the two groups."""
    scores = np.asarray(scores, dtype=np.float64)
    flip_mask = np.asarray(flip_mask, dtype=bool)
    clean, noisy = scores[~flip_mask], scores[flip_mask]
    if clean.size == 0 or noisy.size == 0:
        raise ValidationError("metrics: empty clean or noisy group")
    lo, hi = float(scores.min()), float(scores.max())
    if hi == lo:
        overlap = 1.0
    else:
        h_clean, _ = np.histogram(clean, bins=64, range=(lo, hi))
        h_noisy, _ = np.histogram(noisy, bins=64, range=(lo, hi))
        overlap = float(
            np.minimum(h_clean / clean.size, h_noisy / noisy.size).sum()
        )
    return ScoreDistributionSummary(
        clean_mean=float(clean.mean()),
        clean_std=float(clean.std()),
        noisy_mean=float(noisy.mean()),
        noisy_std=float(noisy.std()),
        overlap_coefficient=overlap,
    )


def spearman(a: np.ndarray, b: np.ndarray) -> float:
    """Rank correlation with midranks; 1.0 when either ranking is constant-identical."""
    ra, rb = midranks(np.asarray(a)), midranks(np.asarray(b))
    sa, sb = ra.std(), rb.std()
    if sa == 0.0 or sb == 0.0:
        return 1.0 if np.array_equal(ra, rb) else 0.0
    return float(((ra - ra.mean()) * (rb - rb.mean())).mean() / (sa * sb))


def convergence_check(history, policy: StoppingPolicy) -> str:
    """Return "stop" or "continue".

    Simulation mode: `history` is the AUROC sequence; stop once the gain over
    the last `window` checkpoints falls below tau_auroc.  Audit mode:
    `history` is a sequence of score snapshots; stop once the Spearman
    correlation of consecutive snapshots has been >= tau_rank for `window`
    consecutive checkpoint pairs.
    """
    if len(history) < 2:
        raise ValidationError("metrics: convergence check needs at least 2 checkpoints")
    w = policy.window
    if policy.mode == "simulation":
        values = [float(v) for v in history]
        if len(values) < w + 1:
            return "continue"
        return "stop" if values[-1] - values[-1 - w] < policy.tau_auroc else "continue"
    if policy.mode == "audit":
        if len(history) < w + 1:
            return "continue"
        recent = history[-(w + 1) :]
        stable = all(
            spearman(recent[i], recent[i + 1]) >= policy.tau_rank for i in range(w)
        )
        return "stop" if stable else "continue"
    raise ValidationError(f"metrics: unknown stopping mode {policy.mode!r}")
