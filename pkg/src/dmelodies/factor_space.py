"""The nine-factor latent space and its mixed-radix dataset index.

Factor order (most significant first) is tonic, octave, scale, rhythm_bar1,
rhythm_bar2, arp_chord1..arp_chord4. Integer codes:

* tonic: 0=C .. 11=B (chromatic)
* octave: literal 4, 5 or 6
* scale: 0=Major, 1=HarmonicMinor, 2=Blues
* rhythm_bar1/2: rank into the rhythm dictionary, 0..27
* arp_chord1..4: 0=Up, 1=Down
"""
from __future__ import annotations

import enum
import math
from typing import Iterator, NamedTuple

import numpy as np


class Scale(enum.IntEnum):
    MAJOR = 0
    HARMONIC_MINOR = 1
    BLUES = 2


class Arp(enum.IntEnum):
    UP = 0
    DOWN = 1


OCTAVES = (4, 5, 6)

FACTOR_NAMES = (
    "tonic",
    "octave",
    "scale",
    "rhythm_bar1",
    "rhythm_bar2",
    "arp_chord1",
    "arp_chord2",
    "arp_chord3",
    "arp_chord4",
)
FACTOR_SIZES = (12, 3, 3, 28, 28, 2, 2, 2, 2)
NUM_FACTORS = len(FACTOR_NAMES)

# place value of each factor digit in the flat index
_STRIDES = tuple(
    math.prod(FACTOR_SIZES[k + 1:]) for k in range(NUM_FACTORS)
)


class FactorTuple(NamedTuple):
    tonic: int
    octave: int
    scale: Scale
    rhythm_bar1: int
    rhythm_bar2: int
    arp_chord1: Arp
    arp_chord2: Arp
    arp_chord3: Arp
    arp_chord4: Arp

    @property
    def arps(self) -> tuple[Arp, Arp, Arp, Arp]:
        return (self.arp_chord1, self.arp_chord2, self.arp_chord3, self.arp_chord4)

    def codes(self) -> tuple[int, ...]:
        """Integer codes in factor order (octave stays literal)."""
        return tuple(int(v) for v in self)

    @classmethod
    def from_codes(cls, codes) -> "FactorTuple":
        codes = [int(c) for c in codes]
        if len(codes) != NUM_FACTORS:
            raise ValueError(f"expected {NUM_FACTORS} factor codes, got {len(codes)}")
        t = cls(
            codes[0],
            codes[1],
            Scale(codes[2]) if 0 <= codes[2] < 3 else codes[2],
            codes[3],
            codes[4],
            *(Arp(c) if c in (0, 1) else c for c in codes[5:]),
        )
        validate(t)
        return t


def cardinality() -> int:
    return math.prod(FACTOR_SIZES)


def factor_space() -> list[tuple[str, int]]:
    return list(zip(FACTOR_NAMES, FACTOR_SIZES))


def _digits(t: FactorTuple) -> tuple[int, ...]:
    return (
        int(t.tonic),
        int(t.octave) - OCTAVES[0],
        int(t.scale),
        int(t.rhythm_bar1),
        int(t.rhythm_bar2),
        *(int(a) for a in t.arps),
    )


def validate(t: FactorTuple) -> None:
    """Raise ValueError if any field is outside its declared range."""
    if int(t.octave) not in OCTAVES:
        raise ValueError(f"octave must be one of {OCTAVES}, got {t.octave}")
    for name, size, digit in zip(FACTOR_NAMES, FACTOR_SIZES, _digits(t)):
        if not 0 <= digit < size:
            raise ValueError(f"{name} out of range: {getattr(t, name)}")


def index_to_factors(i: int) -> FactorTuple:
    n = cardinality()
    if isinstance(i, bool) or not 0 <= i < n:
        raise IndexError(f"index {i} outside [0, {n})")
    i = int(i)
    digits = []
    for stride, size in zip(_STRIDES, FACTOR_SIZES):
        digits.append((i // stride) % size)
    return FactorTuple(
        digits[0],
        OCTAVES[digits[1]],
        Scale(digits[2]),
        digits[3],
        digits[4],
        *(Arp(d) for d in digits[5:]),
    )


def factors_to_index(t: FactorTuple) -> int:
    validate(t)
    return sum(d * s for d, s in zip(_digits(t), _STRIDES))


def enumerate_factors(lo: int = 0, hi: int | None = None) -> Iterator[tuple[int, FactorTuple]]:
    """Yield ``(index, FactorTuple)`` for ``lo <= index < hi`` in order."""
    lo, hi = check_range(lo, hi)
    for i in range(lo, hi):
        yield i, index_to_factors(i)


def check_range(lo: int, hi: int | None) -> tuple[int, int]:
    n = cardinality()
    if hi is None:
        hi = n
    if not 0 <= lo <= hi <= n:
        raise ValueError(f"bad index range [{lo}, {hi}) for dataset of size {n}")
    return int(lo), int(hi)


def index_to_codes(indices) -> np.ndarray:
    """Vectorized decomposition: ``(N,)`` indices to an ``(N, 9)`` code matrix.

    The octave column holds literal octave numbers, matching the CSV.
    """
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= cardinality()):
        raise IndexError("index outside the dataset")
    out = np.empty(idx.shape + (NUM_FACTORS,), dtype=np.int64)
    for k, (stride, size) in enumerate(zip(_STRIDES, FACTOR_SIZES)):
        out[..., k] = (idx // stride) % size
    out[..., 1] += OCTAVES[0]
    return out


def codes_to_index(codes) -> np.ndarray:
    c = np.asarray(codes, dtype=np.int64).copy()
    c[..., 1] -= OCTAVES[0]
    if np.any(c < 0) or np.any(c >= np.asarray(FACTOR_SIZES)):
        raise ValueError("factor code out of range")
    return c @ np.asarray(_STRIDES, dtype=np.int64)
