"""Corpus loading, validation, synthetic corpora, and controlled label flips.

A corpus is a feature matrix (one row per sample, typically frozen encoder
embeddings), binary labels, and stable string ids.  Ids are opaque and carried
end-to-end so real-world identifiers (e.g. image filenames) survive into
reports.  Synthetic noise is injected by flipping a seeded uniform draw of
samples, with the ground truth recorded in a mask for later evaluation.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError, ValidationError
from .rng import stream_rng


@dataclass(frozen=True)
class Dataset:
    """Validated audit corpus: ids, feature rows, binary labels."""

    ids: tuple[str, ...]
    features: np.ndarray  # (N, D) float64
    labels: np.ndarray  # (N,) int8, values in {0, 1}

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])


@dataclass(frozen=True)
class NoiseMask:
    """Ground truth for one injection of synthetic label flips."""

    flipped: np.ndarray  # (N,) bool
    original_labels: np.ndarray  # (N,) int8
    ratio: float
    seed: int


def _validate(ids, features, labels) -> Dataset:
    features = np.ascontiguousarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    n = len(ids)
    if features.ndim != 2:
        raise ValidationError("dataset: features must be a 2-D matrix")
    if features.shape[0] != n or len(labels) != n:
        raise ValidationError(
            f"dataset: dimension mismatch (ids={n}, features rows={features.shape[0]}, "
            f"labels={len(labels)})"
        )
    if len(set(ids)) != n:
        seen: set[str] = set()
        dup = next(i for i in ids if i in seen or seen.add(i))
        raise ValidationError(f"dataset: duplicate id {dup!r}")
    bad = np.argwhere(~np.isfinite(features))
    if bad.size:
        r, c = bad[0]
        raise ValidationError(f"dataset: non-finite value at ({r},{c})")
    if not np.isin(labels, (0, 1)).all():
        raise ValidationError("dataset: labels must be 0 or 1")
    labels = labels.astype(np.int8)
    if labels.min() == labels.max():
        raise ValidationError("dataset: corpus contains a single class")
    return Dataset(ids=tuple(str(i) for i in ids), features=features, labels=labels)


def _read_csv_features(path: Path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"dataset: empty feature file {path}")
        if not header or header[0] != "id":
            raise InputError(f"dataset: feature file {path} must start with an 'id' header column")
        width = len(header)
        ids, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise InputError(f"dataset: {path}:{lineno}: expected {width} columns, got {len(row)}")
            ids.append(row[0])
            try:
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise InputError(f"dataset: {path}:{lineno}: {exc}")
    if not ids:
        raise InputError(f"dataset: feature file {path} has no data rows")
    return ids, np.asarray(rows, dtype=np.float64)


def _read_binary_features(path: Path) -> tuple[list[str], np.ndarray]:
    meta_path = Path(str(path) + ".meta.json")
    try:
        meta = json.loads(meta_path.read_text())
    except OSError as exc:
        raise InputError(f"dataset: cannot read sidecar {meta_path}: {exc}")
    except json.JSONDecodeError as exc:
        raise InputError(f"dataset: malformed sidecar {meta_path}: {exc}")
    try:
        n, d, ids_path = int(meta["n"]), int(meta["d"]), meta["ids_path"]
    except KeyError as exc:
        raise InputError(f"dataset: sidecar {meta_path} missing key {exc}")
    raw = np.fromfile(path, dtype="<f4")
    if raw.size != n * d:
        raise InputError(f"dataset: {path} holds {raw.size} floats, expected n*d = {n * d}")
    ids_file = Path(ids_path)
    if not ids_file.is_absolute():
        ids_file = path.parent / ids_file
    ids = [line for line in ids_file.read_text().splitlines() if line]
    if len(ids) != n:
        raise InputError(f"dataset: {ids_file} lists {len(ids)} ids, expected {n}")
    return ids, raw.astype(np.float64).reshape(n, d)


def _read_labels(path: Path) -> dict[str, int]:
    out: dict[str, int] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["id", "label"]:
            raise InputError(f"dataset: label file {path} must have header 'id,label'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise InputError(f"dataset: {path}:{lineno}: expected 2 columns")
            if row[0] in out:
                raise ValidationError(f"dataset: duplicate id {row[0]!r} in {path}")
            if row[1] not in ("0", "1"):
                raise ValidationError(f"dataset: {path}:{lineno}: label must be 0 or 1, got {row[1]!r}")
            out[row[0]] = int(row[1])
    if not out:
        raise InputError(f"dataset: label file {path} has no rows")
    return out


def load_dataset(features_path: str | Path, labels_path: str | Path) -> Dataset:
    """Load and validate a corpus; feature row order defines sample order.

    Features are either a CSV table with header `id,f0,...` or a raw
    little-endian float32 binary accompanied by a `<path>.meta.json` sidecar
    (keys n, d, ids_path).  Labels are a CSV table `id,label`, joined by id.
    """
    features_path, labels_path = Path(features_path), Path(labels_path)
    for p in (features_path, labels_path):
        if not p.exists():
            raise InputError(f"dataset: no such file {p}")
    if Path(str(features_path) + ".meta.json").exists():
        ids, features = _read_binary_features(features_path)
    else:
        ids, features = _read_csv_features(features_path)
    by_id = _read_labels(labels_path)
    missing = [i for i in ids if i not in by_id]
    if missing:
        raise ValidationError(f"dataset: unmatched id {missing[0]!r} (no label)")
    extra = set(by_id) - set(ids)
    if extra:
        raise ValidationError(f"dataset: unmatched id {sorted(extra)[0]!r} (no feature row)")
    labels = np.array([by_id[i] for i in ids])
    return _validate(ids, features, labels)


def make_dataset(ids, features, labels) -> Dataset:
    """Build a validated Dataset from in-memory arrays."""
    return _validate(list(ids), features, labels)


def flip_count(ratio: float, n: int) -> int:
    """Number of labels to flip: round-half-up of ratio*n."""
    return int(math.floor(ratio * n + 0.5))


def inject_noise(dataset: Dataset, ratio: float, seed: int) -> tuple[Dataset, NoiseMask]:
    """Flip a seeded uniform draw of round(ratio*N) labels.

    The draw is unstratified and without replacement; the input dataset is
    left untouched and the mask records the ground truth.
    """
    if not 0.0 <= ratio <= 1.0:
        raise ValidationError(f"dataset: noise ratio must be in [0,1], got {ratio}")
    n = dataset.n
    m = flip_count(ratio, n)
    rng = stream_rng(seed, 0)
    chosen = rng.choice(n, size=m, replace=False) if m else np.empty(0, dtype=np.int64)
    flipped = np.zeros(n, dtype=bool)
    flipped[chosen] = True
    new_labels = dataset.labels.copy()
    new_labels[flipped] = 1 - new_labels[flipped]
    if m and new_labels.min() == new_labels.max():
        raise ValidationError("dataset: noise injection would leave a single class")
    noisy = Dataset(ids=dataset.ids, features=dataset.features, labels=new_labels)
    mask = NoiseMask(flipped=flipped, original_labels=dataset.labels.copy(), ratio=ratio, seed=seed)
    return noisy, mask


def save_noise_mask(path: str | Path, dataset: Dataset, mask: NoiseMask) -> None:
    """Write the ground-truth mask as `id,original_label,observed_label,flipped`."""
    lines = ["id,original_label,observed_label,flipped"]
    for i, sid in enumerate(dataset.ids):
        lines.append(
            f"{sid},{int(mask.original_labels[i])},{int(dataset.labels[i])},{int(mask.flipped[i])}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def load_noise_mask(path: str | Path, ids: tuple[str, ...]) -> NoiseMask:
    """Read a mask written by save_noise_mask, checking id order."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise InputError(f"dataset: cannot read mask {path}: {exc}")
    if not lines or lines[0] != "id,original_label,observed_label,flipped":
        raise InputError(f"dataset: {path} is not a noise-mask file")
    rows = [line.split(",") for line in lines[1:] if line]
    if [r[0] for r in rows] != list(ids):
        raise ValidationError(f"dataset: mask {path} does not match corpus ids")
    orig = np.array([int(r[1]) for r in rows], dtype=np.int8)
    flipped = np.array([bool(int(r[3])) for r in rows])
    ratio = flipped.sum() / max(len(rows), 1)
    return NoiseMask(flipped=flipped, original_labels=orig, ratio=float(ratio), seed=-1)


def make_gaussian_mixture(
    n: int,
    dim: int,
    pos_fraction: float,
    separation: float,
    seed: int,
) -> Dataset:
    """Two-class spherical Gaussian corpus for simulation runs.

    `separation` is the Mahalanobis distance between the class means, so the
    Bayes-optimal linear classifier has AUROC = Phi(separation / sqrt(2)).
    """
    if n < 4 or dim < 1:
        raise ValidationError("dataset: synthetic corpus needs n >= 4 and dim >= 1")
    n_pos = int(round(pos_fraction * n))
    if n_pos < 1 or n_pos > n - 1:
        raise ValidationError("dataset: synthetic pos_fraction leaves a class empty")
    rng = stream_rng(seed, 0)
    labels = np.zeros(n, dtype=np.int8)
    labels[rng.permutation(n)[:n_pos]] = 1
    features = rng.standard_normal((n, dim))
    shift = separation / math.sqrt(dim)
    features[labels == 1] += shift
    width = len(str(n - 1))
    ids = tuple(f"sample-{i:0{width}d}" for i in range(n))
    return Dataset(ids=ids, features=features, labels=labels)
