"""Fold-loss backend selection.

The compiled Cython kernel is preferred when its extension imported cleanly;
otherwise the numpy fallback is used.  Set SLAKIT_BACKEND=python or
SLAKIT_BACKEND=compiled to force a choice (forcing `compiled` without the
extension built is an error).

Within one backend, results are bit-reproducible.  Across backends the two
kernels agree to floating-point rounding only, because reduction order
differs; checkpoints therefore record which backend wrote them indirectly via
the run's own determinism contract, and a single run should not switch
backends midway.
"""

from __future__ import annotations

import os

from . import _kernel_py
from .errors import ValidationError

try:
    from . import _kernel  # type: ignore[attr-defined]

    HAVE_COMPILED = True
except ImportError:
    _kernel = None
    HAVE_COMPILED = False


def get_backend(name: str | None = None):
    """Return the kernel module for `name` (default: env var, then best available)."""
    if name is None:
        name = os.environ.get("SLAKIT_BACKEND", "")
    if name in ("", "auto"):
        return _kernel if HAVE_COMPILED else _kernel_py
    if name == "python":
        return _kernel_py
    if name == "compiled":
        if not HAVE_COMPILED:
            raise ValidationError("backend: compiled kernel requested but not built")
        return _kernel
    raise ValidationError(f"backend: unknown backend {name!r}")
