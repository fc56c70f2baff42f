"""Run configuration: defaults, flat key-value file round-trip, digesting.

The on-disk format is one `key = value` line per field, sorted by key.  The
effective configuration (defaults filled in, flags applied) is persisted into
every output directory and reproduces the run when fed back via --config.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .engine import EngineConfig
from .errors import InputError, ValidationError
from .metrics import StoppingPolicy


@dataclass
class RunConfig:
    k_folds: int = 5
    repetitions: int = 1000
    pca_dims: int = 10
    epsilon: float = 1e-12
    clip_delta: float = 1e-7
    shrinkage: float = 1e-4
    std_mode: str = "population"
    master_seed: int = 0
    checkpoint_every: int = 0  # 0 -> max(50, repetitions // 200)
    workers: int = 1
    noise_ratio: float = 0.01  # simulate only
    early_stop: bool = False
    stop_window: int = 3
    stop_tau_auroc: float = 0.005
    stop_tau_rank: float = 0.999
    # Synthetic corpus used by `simulate` when no feature file is given.
    synth_n: int = 5000
    synth_dim: int = 10
    synth_pos_fraction: float = 0.1
    synth_separation: float = 1.81

    def validate(self) -> None:
        if self.k_folds < 2:
            raise ValidationError("config: k_folds must be >= 2")
        if self.repetitions < 1:
            raise ValidationError("config: repetitions must be >= 1")
        if self.pca_dims < 1:
            raise ValidationError("config: pca_dims must be positive")
        for name in ("epsilon", "clip_delta", "stop_tau_auroc"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"config: {name} must be positive")
        if not 0.0 <= self.noise_ratio <= 1.0:
            raise ValidationError("config: noise_ratio must be in [0,1]")
        if self.std_mode not in ("population", "sample"):
            raise ValidationError(f"config: unknown std_mode {self.std_mode!r}")

    def engine_config(self) -> EngineConfig:
        return EngineConfig(
            k_folds=self.k_folds,
            epsilon=self.epsilon,
            clip_delta=self.clip_delta,
            shrinkage=self.shrinkage,
            std_mode=self.std_mode,
        )

    def stopping_policy(self, mode: str) -> StoppingPolicy:
        return StoppingPolicy(
            mode=mode,
            window=self.stop_window,
            tau_auroc=self.stop_tau_auroc,
            tau_rank=self.stop_tau_rank,
        )

    def effective_checkpoint_every(self) -> int:
        if self.checkpoint_every > 0:
            return self.checkpoint_every
        return max(50, self.repetitions // 200)


def to_text(config: RunConfig) -> str:
    lines = []
    for f in sorted(dataclasses.fields(config), key=lambda f: f.name):
        v = getattr(config, f.name)
        lines.append(f"{f.name} = {v!r}" if isinstance(v, float) else f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


def save(path: str | Path, config: RunConfig) -> None:
    Path(path).write_text(to_text(config))


def load(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    """Parse a key-value config file on top of `base` (defaults if omitted)."""
    config = dataclasses.replace(base) if base else RunConfig()
    types = {f.name: f.type for f in dataclasses.fields(RunConfig)}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"config: cannot read {path}: {exc}")
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InputError(f"config: {path}:{lineno}: expected 'key = value'")
        key, _, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in types:
            raise InputError(f"config: {path}:{lineno}: unknown key {key!r}")
        try:
            setattr(config, key, _coerce(types[key], raw))
        except ValueError:
            raise InputError(f"config: {path}:{lineno}: bad value {raw!r} for {key}")
    return config


def _coerce(type_name: str, raw: str):
    if type_name == "int":
        return int(raw)
    if type_name == "float":
        return float(raw)
    if type_name == "bool":
        if raw in ("True", "true", "1"):
            return True
        if raw in ("False", "false", "0"):
            return False
        raise ValueError(raw)
    return raw
