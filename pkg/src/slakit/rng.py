"""Deterministic random streams.

All randomness in the package flows through PCG64 generators seeded by an
explicit splitmix64-style avalanche of (master_seed, stream index).  PCG64 is
a published small-state generator whose output is fixed by the numpy
implementation, so runs are bit-identical across platforms; the global numpy
RNG is never touched.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# Stream indices far above any repetition index, reserved for non-fold streams.
NOISE_STREAM = 1 << 48
CORPUS_STREAM = (1 << 48) + 1


def mix64(master_seed: int, stream: int) -> int:
    """Avalanche (master_seed, stream) into a single 64-bit seed.

    splitmix64 finalizer applied to master_seed advanced by `stream + 1`
    golden-ratio increments; distinct streams give independent-looking seeds
    without storing per-stream generator state.
    """
    z = (master_seed + 0x9E3779B97F4A7C15 * (stream + 1)) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def stream_rng(master_seed: int, stream: int) -> np.random.Generator:
    """PCG64 generator for one deterministic stream."""
    return np.random.Generator(np.random.PCG64(mix64(master_seed, stream)))
