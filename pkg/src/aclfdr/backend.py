"""Kernel backend selection.

The package ships two implementations of its hot kernels: a compiled
extension (``aclfdr._kernels``, built from Cython) and a pure-numpy
fallback (``aclfdr._kernels_py``).  The compiled module is preferred
when importable; set the environment variable ``ACLFDR_BACKEND`` to
``python`` or ``cython`` to force one side, or leave it unset (or
``auto``) for the default behaviour.

State paths and pair counts are bit-identical across backends.  The
windowed logit kernel differs only in floating-point summation order,
so cross-backend agreement is to rounding, not byte-for-byte; results
are deterministic within a backend.
"""

from __future__ import annotations

import os

from . import _kernels_py

_choice = os.environ.get("ACLFDR_BACKEND", "auto").strip().lower()
if _choice not in ("auto", "python", "cython"):
    raise ImportError(
        f"ACLFDR_BACKEND must be 'auto', 'python' or 'cython', got {_choice!r}"
    )

if _choice == "python":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        if _choice == "cython":
            raise ImportError(
                "ACLFDR_BACKEND=cython but the compiled extension "
                "aclfdr._kernels is not importable; reinstall with the "
                "extension built or unset ACLFDR_BACKEND"
            ) from None
        _impl = _kernels_py
        BACKEND = "python"

HAVE_EXT = BACKEND == "cython"

windowed_logits = _impl.windowed_logits
simulate_states = _impl.simulate_states
pair_counts = _impl.pair_counts

__all__ = [
    "BACKEND",
    "HAVE_EXT",
    "windowed_logits",
    "simulate_states",
    "pair_counts",
]
