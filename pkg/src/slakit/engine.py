"""Standardized loss aggregation core loop.

Each repetition r draws a fresh stratified K-fold plan, fits the discriminant
classifier once per fold, and records the K validation cross-entropies.  The
losses are z-scored within the repetition (population std over the K folds,
denominator guarded by epsilon) and every sample inherits the standardized
score of its validation fold.  Scores accumulate in a ScoreBoard along with
the hard-counting baseline, which gives +1 to every member of the single
worst (highest-loss) fold.

Repetitions are embarrassingly parallel: workers compute RepetitionResult
values independently and a single reducer applies them in repetition-index
order, so accumulated sums are identical for any worker count.
"""

from __future__ import annotations

import hashlib
import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import _kernel_py, backend
from .errors import InputError, ValidationError
from .folds import FoldPlan, make_fold_plan

CHECKPOINT_MAGIC = b"SLA1"
CHECKPOINT_VERSION = 1
_HEADER = struct.Struct("<4sIQIQ32s")  # magic, version, N, K, repetitions_done, digest


@dataclass(frozen=True)
class EngineConfig:
    """Knobs that change the numbers a run produces (all folded into the digest)."""

    k_folds: int = 5
    epsilon: float = 1e-12  # guard for the standardization denominator
    clip_delta: float = 1e-7  # probability clip before the cross-entropy logs
    shrinkage: float = 1e-4
    std_mode: str = "population"  # or "sample" (K-1 denominator)

    def validate(self) -> None:
        if self.k_folds < 2:
            raise ValidationError(f"engine: k_folds must be >= 2, got {self.k_folds}")
        if self.epsilon <= 0 or self.clip_delta <= 0:
            raise ValidationError("engine: epsilon and clip_delta must be positive")
        if self.std_mode not in ("population", "sample"):
            raise ValidationError(f"engine: unknown std_mode {self.std_mode!r}")


@dataclass(frozen=True)
class RepetitionResult:
    r: int
    fold_losses: np.ndarray  # (K,) nats
    mu: float
    sigma: float
    standardized: np.ndarray  # (K,)
    worst_fold: int


@dataclass
class ScoreBoard:
    """Running per-sample accumulators; checkpointable and resumable."""

    sum_scores: np.ndarray  # (N,) float64
    recov_counts: np.ndarray  # (N,) uint64
    repetitions_done: int
    config_digest: bytes  # 32-byte sha256 of config + data

    @classmethod
    def empty(cls, n: int, config_digest: bytes) -> "ScoreBoard":
        return cls(
            sum_scores=np.zeros(n, dtype=np.float64),
            recov_counts=np.zeros(n, dtype=np.uint64),
            repetitions_done=0,
            config_digest=config_digest,
        )

    @property
    def n(self) -> int:
        return int(self.sum_scores.shape[0])

    def scores(self) -> np.ndarray:
        """Current per-sample aggregated scores S_i = sum / repetitions_done."""
        if self.repetitions_done < 1:
            raise ValidationError("engine: no repetitions applied yet")
        return self.sum_scores / self.repetitions_done

    def recov_fractions(self) -> np.ndarray:
        if self.repetitions_done < 1:
            raise ValidationError("engine: no repetitions applied yet")
        return self.recov_counts.astype(np.float64) / self.repetitions_done


@dataclass(frozen=True)
class SampleRecord:
    id: str
    sla_score: float
    recov_count: int
    recov_fraction: float
    rank: int


def config_digest(x: np.ndarray, labels: np.ndarray, config: EngineConfig, master_seed: int) -> bytes:
    """sha256 binding a board to its data matrix, labels, seed, and config."""
    h = hashlib.sha256()
    canon = (
        f"k_folds={config.k_folds};epsilon={config.epsilon!r};"
        f"clip_delta={config.clip_delta!r};shrinkage={config.shrinkage!r};"
        f"std_mode={config.std_mode};master_seed={master_seed}"
    )
    h.update(canon.encode())
    h.update(np.ascontiguousarray(x, dtype=np.float64).tobytes())
    h.update(np.ascontiguousarray(labels, dtype=np.int8).tobytes())
    return h.digest()


def fold_loss(labels: np.ndarray, probs: np.ndarray, clip_delta: float = 1e-7) -> float:
    """Mean binary cross-entropy of one validation fold, in nats."""
    labels = np.asarray(labels)
    probs = np.asarray(probs, dtype=np.float64)
    if labels.shape != probs.shape:
        raise ValidationError("engine: labels/probs length mismatch")
    if labels.size == 0:
        raise ValidationError("engine: empty fold")
    return _kernel_py.bce_loss(labels, probs, clip_delta)


def standardize(
    fold_losses: np.ndarray, epsilon: float = 1e-12, std_mode: str = "population"
) -> tuple[float, float, np.ndarray]:
    """Z-score the K fold losses within one repetition."""
    losses = np.asarray(fold_losses, dtype=np.float64)
    if losses.size < 2:
        raise ValidationError("engine: standardization needs at least 2 folds")
    if not np.isfinite(losses).all():
        raise ValidationError("engine: non-finite fold loss")
    mu = float(losses.mean())
    ddof = 0 if std_mode == "population" else 1
    sigma = float(losses.std(ddof=ddof))
    return mu, sigma, (losses - mu) / max(sigma, epsilon)


def run_repetition(
    x: np.ndarray,
    labels: np.ndarray,
    k_folds: int,
    master_seed: int,
    r: int,
    config: EngineConfig | None = None,
    kernel=None,
) -> RepetitionResult:
    """One full repetition: fold plan, K classifier fits, standardized scores."""
    config = config or EngineConfig(k_folds=k_folds)
    if config.k_folds != k_folds:
        config = replace(config, k_folds=k_folds)
    config.validate()
    kernel = kernel or backend.get_backend()
    try:
        plan = make_fold_plan(labels, k_folds, master_seed, r)
        losses = kernel.fold_losses(
            x, labels, plan.assignments, k_folds, config.clip_delta, config.shrinkage
        )
    except Exception as exc:
        exc.args = (f"{exc.args[0] if exc.args else exc} (repetition {r})",)
        raise
    mu, sigma, standardized = standardize(losses, config.epsilon, config.std_mode)
    worst = int(np.argmax(losses))  # argmax takes the lowest index on ties
    return RepetitionResult(
        r=r, fold_losses=losses, mu=mu, sigma=sigma, standardized=standardized, worst_fold=worst
    )


def apply_repetition(board: ScoreBoard, plan: FoldPlan, result: RepetitionResult) -> ScoreBoard:
    """Fold one repetition into the board; must be called in repetition order."""
    if result.r != board.repetitions_done:
        raise ValidationError(
            f"engine: out-of-order application (board at {board.repetitions_done}, "
            f"result is repetition {result.r})"
        )
    if plan.assignments.shape[0] != board.n:
        raise ValidationError("engine: board size does not match fold plan")
    board.sum_scores += result.standardized[plan.assignments]
    board.recov_counts[plan.assignments == result.worst_fold] += 1
    board.repetitions_done += 1
    return board


def finalize(board: ScoreBoard, ids) -> list[SampleRecord]:
    """Normalized scores and ranks; rank 1 is the highest score, ties by id."""
    ids = list(ids)
    if len(ids) != board.n:
        raise ValidationError("engine: id count does not match board size")
    s = board.scores()
    fractions = board.recov_fractions()
    order = sorted(range(board.n), key=lambda i: (-s[i], ids[i]))
    rank = [0] * board.n
    for pos, i in enumerate(order, start=1):
        rank[i] = pos
    return [
        SampleRecord(
            id=ids[i],
            sla_score=float(s[i]),
            recov_count=int(board.recov_counts[i]),
            recov_fraction=float(fractions[i]),
            rank=rank[i],
        )
        for i in range(board.n)
    ]


def save_checkpoint(path, board: ScoreBoard) -> None:
    """Binary snapshot: fixed header, then score sums, then baseline counts."""
    header = _HEADER.pack(
        CHECKPOINT_MAGIC,
        CHECKPOINT_VERSION,
        board.n,
        0,  # reserved fold-count slot, informational only
        board.repetitions_done,
        board.config_digest,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(board.sum_scores.astype("<f8").tobytes())
        fh.write(board.recov_counts.astype("<u8").tobytes())


def restore_checkpoint(path, expected_digest: bytes | None = None) -> ScoreBoard:
    """Load a checkpoint, refusing digest mismatches and truncated files."""
    try:
        blob = open(path, "rb").read()
    except OSError as exc:
        raise InputError(f"engine: cannot read checkpoint {path}: {exc}")
    if len(blob) < _HEADER.size:
        raise InputError(f"engine: truncated checkpoint {path}")
    magic, version, n, _k, reps, digest = _HEADER.unpack_from(blob)
    if magic != CHECKPOINT_MAGIC or version != CHECKPOINT_VERSION:
        raise InputError(f"engine: {path} is not a checkpoint file")
    expected_size = _HEADER.size + 16 * n
    if len(blob) != expected_size:
        raise InputError(f"engine: truncated checkpoint {path}")
    if expected_digest is not None and digest != expected_digest:
        raise ValidationError("engine: config mismatch (checkpoint was written by a different run)")
    sums = np.frombuffer(blob, dtype="<f8", count=n, offset=_HEADER.size).copy()
    counts = np.frombuffer(blob, dtype="<u8", count=n, offset=_HEADER.size + 8 * n).copy()
    return ScoreBoard(
        sum_scores=sums, recov_counts=counts, repetitions_done=reps, config_digest=digest
    )


def run(
    x: np.ndarray,
    labels: np.ndarray,
    config: EngineConfig,
    repetitions: int,
    master_seed: int,
    *,
    workers: int = 1,
    board: ScoreBoard | None = None,
    checkpoint_path=None,
    checkpoint_every: int = 0,
    on_checkpoint=None,
    kernel=None,
) -> ScoreBoard:
    """Drive repetitions board.repetitions_done .. repetitions-1, in order.

    `on_checkpoint(board)` fires every `checkpoint_every` applied repetitions
    (and at the end); returning True stops the run early.  The checkpoint file
    is rewritten at the same cadence when a path is given.  Output is
    independent of `workers`.
    """
    config.validate()
    if repetitions < 1:
        raise ValidationError(f"engine: repetitions must be >= 1, got {repetitions}")
    x = np.ascontiguousarray(x, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int8)
    digest = config_digest(x, labels, config, master_seed)
    if board is None:
        board = ScoreBoard.empty(x.shape[0], digest)
    elif board.config_digest != digest:
        raise ValidationError("engine: config mismatch (board belongs to a different run)")
    kernel = kernel or backend.get_backend()
    workers = max(1, workers)
    cadence = checkpoint_every if checkpoint_every > 0 else repetitions

    def compute(r: int) -> tuple[FoldPlan, RepetitionResult]:
        plan = make_fold_plan(labels, config.k_folds, master_seed, r)
        losses = kernel.fold_losses(
            x, labels, plan.assignments, config.k_folds, config.clip_delta, config.shrinkage
        )
        mu, sigma, standardized = standardize(losses, config.epsilon, config.std_mode)
        result = RepetitionResult(
            r=r,
            fold_losses=losses,
            mu=mu,
            sigma=sigma,
            standardized=standardized,
            worst_fold=int(np.argmax(losses)),
        )
        return plan, result

    def tick() -> bool:
        if checkpoint_path is not None:
            save_checkpoint(checkpoint_path, board)
        return bool(on_checkpoint is not None and on_checkpoint(board))

    start = board.repetitions_done
    stopped = False
    if workers == 1:
        for r in range(start, repetitions):
            plan, result = compute(r)
            apply_repetition(board, plan, result)
            if board.repetitions_done % cadence == 0 or board.repetitions_done == repetitions:
                if tick():
                    stopped = True
                    break
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            r = start
            while r < repetitions and not stopped:
                batch = range(r, min(r + 4 * workers, repetitions))
                for plan, result in pool.map(compute, batch):
                    apply_repetition(board, plan, result)
                    done = board.repetitions_done
                    if done % cadence == 0 or done == repetitions:
                        if tick():
                            stopped = True
                            break
                r = batch.stop
    if not stopped and board.repetitions_done % cadence != 0 and checkpoint_path is not None:
        save_checkpoint(checkpoint_path, board)
    return board


def variance_bound(k_folds: int) -> float:
    """Largest possible |standardized score| under the population z-scoring."""
    return math.sqrt(k_folds - 1)
