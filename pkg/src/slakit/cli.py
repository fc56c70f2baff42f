"""Command-line front end.

Three subcommands: `simulate` runs the synthetic-noise benchmark (standardized
scoring vs the hard-counting baseline, with detection AUROC traces against the
known flip mask), `audit` scores a real corpus with no ground truth, and
`report` renders a scores file for humans.

Standard output carries machine-readable status lines; progress goes to
standard error.  Exit codes: 0 success, 1 validation error, 2 I/O error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import config as config_mod
from . import dataset as dataset_mod
from . import engine, metrics, pca
from .errors import InputError, NumericalError, SlakitError, ValidationError
from .rng import CORPUS_STREAM, NOISE_STREAM, mix64


def _add_shared_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key-value config file; flags override file values")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--workers", type=int, help="worker threads (0 = all cores)")
    p.add_argument("--reps", type=int, help="number of repetitions")
    p.add_argument("--k", type=int, help="number of folds")
    p.add_argument("--pca-dims", type=int, help="projection dimensionality")
    p.add_argument("--checkpoint", help="checkpoint file (default: <out>/checkpoint.sla)")
    p.add_argument("--resume", action="store_true", help="resume from the checkpoint file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--features", help="feature table (CSV or binary + sidecar)")
    p.add_argument("--labels", help="label table (CSV id,label)")
    p.add_argument("--early-stop", action="store_true", help="enable convergence-based stopping")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slakit", description="Sample-level noisy-label detection by standardized loss aggregation"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="synthetic-noise benchmark with ground truth")
    _add_shared_flags(p_sim)
    p_sim.add_argument("--noise-ratio", type=float, help="fraction of labels to flip")

    p_audit = sub.add_parser("audit", help="score a corpus without ground truth")
    _add_shared_flags(p_audit)

    p_rep = sub.add_parser("report", help="render a scores file")
    p_rep.add_argument("scores", help="scores file written by simulate/audit")
    p_rep.add_argument("--mask", help="noise-mask file for clean/noisy group summary")
    p_rep.add_argument("--top", type=int, default=20, help="rows in the top table")
    p_rep.add_argument("--out", help="output file (default: stdout)")
    return parser


def _build_config(args) -> config_mod.RunConfig:
    cfg = config_mod.load(args.config) if args.config else config_mod.RunConfig()
    overrides = {
        "seed": "master_seed",
        "workers": "workers",
        "reps": "repetitions",
        "k": "k_folds",
        "pca_dims": "pca_dims",
    }
    for flag, field in overrides.items():
        value = getattr(args, flag, None)
        if value is not None:
            setattr(cfg, field, value)
    if getattr(args, "noise_ratio", None) is not None:
        cfg.noise_ratio = args.noise_ratio
    if getattr(args, "early_stop", False):
        cfg.early_stop = True
    cfg.validate()
    return cfg


def _prepare_corpus(args, cfg: config_mod.RunConfig, simulate: bool):
    if args.features or args.labels:
        if not (args.features and args.labels):
            raise ValidationError("cli: --features and --labels must be given together")
        ds = dataset_mod.load_dataset(args.features, args.labels)
    elif simulate:
        ds = dataset_mod.make_gaussian_mixture(
            cfg.synth_n,
            cfg.synth_dim,
            cfg.synth_pos_fraction,
            cfg.synth_separation,
            mix64(cfg.master_seed, CORPUS_STREAM),
        )
    else:
        raise ValidationError("cli: audit requires --features and --labels")
    return ds


def _project(ds: dataset_mod.Dataset, cfg: config_mod.RunConfig) -> np.ndarray:
    d = min(cfg.pca_dims, ds.n, ds.dim)
    model = pca.fit_pca(ds.features, d)
    return np.ascontiguousarray(pca.transform(model, ds.features))


def _write_scores(path: Path, records) -> None:
    rows = sorted(records, key=lambda rec: rec.rank)
    lines = ["id,sla_score,recov_count,recov_fraction,rank"]
    for rec in rows:
        lines.append(
            f"{rec.id},{rec.sla_score!r},{rec.recov_count},{rec.recov_fraction!r},{rec.rank}"
        )
    path.write_text("\n".join(lines) + "\n")


def _setup_run(args, cfg, x, labels):
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    config_mod.save(out_dir / "config.txt", cfg)
    checkpoint_path = Path(args.checkpoint) if args.checkpoint else out_dir / "checkpoint.sla"
    econfig = cfg.engine_config()
    digest = engine.config_digest(x, labels, econfig, cfg.master_seed)
    board = None
    if args.resume:
        board = engine.restore_checkpoint(checkpoint_path, expected_digest=digest)
    workers = cfg.workers if cfg.workers > 0 else (os.cpu_count() or 1)
    return out_dir, checkpoint_path, econfig, board, workers


def cmd_simulate(args) -> int:
    cfg = _build_config(args)
    clean = _prepare_corpus(args, cfg, simulate=True)
    noisy, mask = dataset_mod.inject_noise(
        clean, cfg.noise_ratio, mix64(cfg.master_seed, NOISE_STREAM)
    )
    x = _project(noisy, cfg)
    labels = noisy.labels
    out_dir, checkpoint_path, econfig, board, workers = _setup_run(args, cfg, x, labels)
    dataset_mod.save_noise_mask(out_dir / "noise_mask.csv", noisy, mask)

    trace = metrics.AurocTrace(checkpoints=[])
    policy = cfg.stopping_policy("simulation")

    def on_checkpoint(b: engine.ScoreBoard) -> bool:
        auroc_sla = metrics.compute_auroc(b.scores(), mask.flipped)
        auroc_recov = metrics.compute_auroc(b.recov_fractions(), mask.flipped)
        trace.append(b.repetitions_done, auroc_sla, auroc_recov)
        print(
            f"repetitions={b.repetitions_done} auroc_sla={auroc_sla:.4f} "
            f"auroc_recov={auroc_recov:.4f}",
            file=sys.stderr,
        )
        if cfg.early_stop and len(trace.checkpoints) >= 2:
            return metrics.convergence_check(trace.sla_values(), policy) == "stop"
        return False

    board = engine.run(
        x,
        labels,
        econfig,
        cfg.repetitions,
        cfg.master_seed,
        workers=workers,
        board=board,
        checkpoint_path=checkpoint_path,
        checkpoint_every=cfg.effective_checkpoint_every(),
        on_checkpoint=on_checkpoint,
    )
    records = engine.finalize(board, noisy.ids)
    _write_scores(out_dir / "scores.csv", records)

    lines = ["repetitions,auroc_sla,auroc_recov"]
    lines += [f"{r},{a!r},{b!r}" for r, a, b in trace.checkpoints]
    (out_dir / "trace.csv").write_text("\n".join(lines) + "\n")

    summary = metrics.summarize_distributions(board.scores(), mask.flipped)
    (out_dir / "distribution.txt").write_text(
        "".join(
            f"{name} = {getattr(summary, name)!r}\n"
            for name in (
                "clean_mean",
                "clean_std",
                "noisy_mean",
                "noisy_std",
                "overlap_coefficient",
            )
        )
    )
    final = trace.checkpoints[-1]
    print(
        f"status=ok repetitions={board.repetitions_done} "
        f"auroc_sla={final[1]!r} auroc_recov={final[2]!r}"
    )
    return 0


def cmd_audit(args) -> int:
    cfg = _build_config(args)
    ds = _prepare_corpus(args, cfg, simulate=False)
    x = _project(ds, cfg)
    out_dir, checkpoint_path, econfig, board, workers = _setup_run(args, cfg, x, ds.labels)

    snapshots: list[np.ndarray] = []
    correlations: list[tuple[int, float]] = []
    policy = cfg.stopping_policy("audit")

    def on_checkpoint(b: engine.ScoreBoard) -> bool:
        snapshots.append(b.scores())
        if len(snapshots) >= 2:
            rho = metrics.spearman(snapshots[-2], snapshots[-1])
            correlations.append((b.repetitions_done, rho))
            print(f"repetitions={b.repetitions_done} rank_correlation={rho:.6f}", file=sys.stderr)
        else:
            print(f"repetitions={b.repetitions_done}", file=sys.stderr)
        if cfg.early_stop and len(snapshots) >= 2:
            return metrics.convergence_check(snapshots, policy) == "stop"
        return False

    board = engine.run(
        x,
        ds.labels,
        econfig,
        cfg.repetitions,
        cfg.master_seed,
        workers=workers,
        board=board,
        checkpoint_path=checkpoint_path,
        checkpoint_every=cfg.effective_checkpoint_every(),
        on_checkpoint=on_checkpoint,
    )
    records = engine.finalize(board, ds.ids)
    _write_scores(out_dir / "scores.csv", records)
    lines = ["repetitions,rank_correlation"]
    lines += [f"{r},{rho!r}" for r, rho in correlations]
    (out_dir / "rank_trace.csv").write_text("\n".join(lines) + "\n")
    print(f"status=ok repetitions={board.repetitions_done}")
    return 0


def _read_scores_file(path: Path):
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise InputError(f"cli: cannot read scores file {path}: {exc}")
    if not lines or lines[0] != "id,sla_score,recov_count,recov_fraction,rank":
        raise InputError(f"cli: {path} is not a scores file")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 5:
            raise InputError(f"cli: {path}:{lineno}: expected 5 columns")
        try:
            records.append(
                engine.SampleRecord(
                    id=parts[0],
                    sla_score=float(parts[1]),
                    recov_count=int(parts[2]),
                    recov_fraction=float(parts[3]),
                    rank=int(parts[4]),
                )
            )
        except ValueError as exc:
            raise InputError(f"cli: {path}:{lineno}: {exc}")
    if not records:
        raise InputError(f"cli: {path} has no score rows")
    return records


def _text_histogram(values: np.ndarray, bins: int = 32, width: int = 40) -> list[str]:
    counts, edges = np.histogram(values, bins=bins)
    peak = max(int(counts.max()), 1)
    out = []
    for i, c in enumerate(counts):
        bar = "#" * max(1 if c else 0, round(width * c / peak))
        out.append(f"[{edges[i]:+.4f}, {edges[i + 1]:+.4f})  {c:>7d}  {bar}")
    return out


def cmd_report(args) -> int:
    records = _read_scores_file(Path(args.scores))
    records.sort(key=lambda rec: rec.rank)
    top_n = min(max(args.top, 0), len(records))
    out = [
        f"samples: {len(records)}",
        "",
        f"top {top_n} by standardized score",
        f"{'rank':>5}  {'id':<24} {'score':>12}  {'worst-fold count':>16}  {'fraction':>9}",
    ]
    for rec in records[:top_n]:
        out.append(
            f"{rec.rank:>5}  {rec.id:<24} {rec.sla_score:>12.6f}  "
            f"{rec.recov_count:>16d}  {rec.recov_fraction:>9.4f}"
        )
    scores = np.array([rec.sla_score for rec in records])
    out += ["", "score histogram"]
    out += _text_histogram(scores)
    if args.mask:
        mask_ids = _mask_ids(args.mask)
        mask = dataset_mod.load_noise_mask(Path(args.mask), mask_ids)
        by_id = {rec.id: rec.sla_score for rec in records}
        missing = [i for i in mask_ids if i not in by_id]
        if missing:
            raise ValidationError(f"cli: mask id {missing[0]!r} absent from scores file")
        ordered = np.array([by_id[i] for i in mask_ids])
        summary = metrics.summarize_distributions(ordered, mask.flipped)
        out += [
            "",
            "clean/noisy group summary",
            f"clean_mean = {summary.clean_mean:.6f}",
            f"clean_std = {summary.clean_std:.6f}",
            f"noisy_mean = {summary.noisy_mean:.6f}",
            f"noisy_std = {summary.noisy_std:.6f}",
            f"overlap_coefficient = {summary.overlap_coefficient:.6f}",
            f"noisy_mean_exceeds_clean_mean = {summary.noisy_mean > summary.clean_mean}",
        ]
    text = "\n".join(out) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _mask_ids(path) -> tuple[str, ...]:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise InputError(f"cli: cannot read mask {path}: {exc}")
    return tuple(line.split(",", 1)[0] for line in lines[1:] if line)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"simulate": cmd_simulate, "audit": cmd_audit, "report": cmd_report}
    try:
        return handlers[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except SlakitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
