"""Vectorized numpy implementations of the hot kernels.

Used when the compiled extension is unavailable, and as the reference the
extension is checked against.
"""
from __future__ import annotations

import numpy as np

# radices of the flat index, least significant last
_SIZES = np.array([12, 3, 3, 28, 28, 2, 2, 2, 2], dtype=np.int64)
_STRIDES = np.array([int(np.prod(_SIZES[k + 1:])) for k in range(9)], dtype=np.int64)


def synth_token_ids(lo, hi, chord_table, rhythm_masks, hold_id, rest_id):
    idx = np.arange(lo, hi, dtype=np.int64)
    d = (idx[:, None] // _STRIDES) % _SIZES
    n = len(idx)
    out = np.full((n, 16), hold_id, dtype=np.int16)
    chords = chord_table[d[:, 0], d[:, 1], d[:, 2]]  # (n, 3 chords, 3 tones)
    # bar layout: (I, IV) then (V, I)
    sequence = ((0, 5), (1, 6), (2, 7), (0, 8))
    notes = np.empty((n, 12), dtype=np.int16)
    for j, (chord, arp_col) in enumerate(sequence):
        tones = chords[:, chord, :]
        down = d[:, arp_col] == 1
        tones = np.where(down[:, None], tones[:, ::-1], tones)
        notes[:, 3 * j:3 * j + 3] = tones
    masks = rhythm_masks.astype(bool)
    positions = np.array([np.flatnonzero(m) for m in masks], dtype=np.int64)  # (28, 6)
    rows = np.repeat(np.arange(n), 6)
    for bar in range(2):
        slots = positions[d[:, 3 + bar]] + 8 * bar
        out[rows, slots.ravel()] = notes[:, 6 * bar:6 * bar + 6].ravel()
    first = positions[d[:, 3], 0]
    out[np.arange(16)[None, :] < first[:, None]] = rest_id
    return out


def joint_counts(x, y, nx, ny):
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    return np.bincount(x * ny + y, minlength=nx * ny).reshape(nx, ny)


def adam_update(p, g, m, v, beta1, beta2, step_size, inv_sqrt_c2, eps):
    m *= beta1
    m += (1.0 - beta1) * g
    v *= beta2
    v += (1.0 - beta2) * (g * g)
    denom = np.sqrt(v)
    denom *= inv_sqrt_c2
    denom += eps
    np.divide(m, denom, out=denom)
    denom *= step_size
    p -= denom
