"""Hot-kernel dispatch.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy versions in ``_pykernels`` are used. Setting ``DMELODIES_PURE_PYTHON=1``
forces the fallback.
"""
from __future__ import annotations

import os

import numpy as np

from . import _pykernels

if os.environ.get("DMELODIES_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "numpy"


def synth_token_ids(lo: int, hi: int, impl=None) -> np.ndarray:
    """Token ids for dataset indices ``lo..hi-1`` as an ``(hi - lo, 16)`` int16 array."""
    from .melody import HOLD, REST, chord_token_table, token_to_id
    from .rhythm import all_patterns

    masks = np.ascontiguousarray([p.onsets for p in all_patterns()], dtype=np.uint8)
    lookup = token_to_id()
    table = np.ascontiguousarray(chord_token_table(), dtype=np.int32)
    return (impl or _impl).synth_token_ids(int(lo), int(hi), table, masks, lookup[HOLD], lookup[REST])


def joint_counts(x, y, nx: int, ny: int, impl=None) -> np.ndarray:
    """Contingency table of two integer columns with values in ``[0, nx)`` and ``[0, ny)``."""
    return (impl or _impl).joint_counts(x, y, int(nx), int(ny))


def adam_update(p, g, m, v, beta1: float, beta2: float, step_size: float, inv_sqrt_c2: float, eps: float,
                impl=None) -> None:
    """In-place ADAM update on contiguous float64 arrays of one shape.

    ``step_size`` is ``lr / (1 - beta1**t)`` and ``inv_sqrt_c2`` is
    ``1 / sqrt(1 - beta2**t)``.
    """
    flat = [a.reshape(-1) for a in (p, g, m, v)]
    for a in (p, m, v):
        if not a.flags.c_contiguous or a.dtype != np.float64:
            raise ValueError("ADAM buffers must be contiguous float64")
    g_flat = np.ascontiguousarray(flat[1], dtype=np.float64)
    (impl or _impl).adam_update(flat[0], g_flat, flat[2], flat[3], float(beta1), float(beta2),
                                float(step_size), float(inv_sqrt_c2), float(eps))
