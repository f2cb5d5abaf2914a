"""Per-bar onset patterns: the 28 ways to place 6 notes on 8 eighth-note slots.

Patterns are ranked in ascending lexicographic order of their sorted onset
positions, so rank 0 is ``(0, 1, 2, 3, 4, 5)`` and rank 27 is
``(2, 3, 4, 5, 6, 7)``.
"""
from __future__ import annotations

from functools import lru_cache
from math import comb
from typing import NamedTuple, Sequence

SLOTS_PER_BAR = 8
NOTES_PER_BAR = 6
NUM_PATTERNS = comb(SLOTS_PER_BAR, NOTES_PER_BAR)


class RhythmPattern(NamedTuple):
    onsets: tuple[bool, ...]

    @classmethod
    def from_positions(cls, positions: Sequence[int]) -> "RhythmPattern":
        pos = set(positions)
        if any(not 0 <= p < SLOTS_PER_BAR for p in pos):
            raise ValueError(f"onset positions must lie in 0..{SLOTS_PER_BAR - 1}")
        return cls(tuple(p in pos for p in range(SLOTS_PER_BAR)))

    @property
    def positions(self) -> tuple[int, ...]:
        return tuple(p for p, on in enumerate(self.onsets) if on)

    def __str__(self) -> str:
        return "".join("x" if on else "." for on in self.onsets)


def _unrank(r: int) -> tuple[int, ...]:
    # lexicographic combination unranking
    out = []
    x = 0
    for k in range(NOTES_PER_BAR, 0, -1):
        while True:
            below = comb(SLOTS_PER_BAR - x - 1, k - 1)
            if r < below:
                break
            r -= below
            x += 1
        out.append(x)
        x += 1
    return tuple(out)


def pattern_from_rank(r: int) -> RhythmPattern:
    if isinstance(r, bool) or not 0 <= r < NUM_PATTERNS:
        raise IndexError(f"rhythm rank {r} outside [0, {NUM_PATTERNS})")
    return RhythmPattern.from_positions(_unrank(int(r)))


def rank_from_pattern(p: RhythmPattern | Sequence[bool]) -> int:
    onsets = tuple(bool(b) for b in (p.onsets if isinstance(p, RhythmPattern) else p))
    if len(onsets) != SLOTS_PER_BAR:
        raise ValueError(f"pattern must have {SLOTS_PER_BAR} slots, got {len(onsets)}")
    positions = [i for i, on in enumerate(onsets) if on]
    if len(positions) != NOTES_PER_BAR:
        raise ValueError(f"pattern must have exactly {NOTES_PER_BAR} onsets, got {len(positions)}")
    rank = 0
    prev = -1
    k = NOTES_PER_BAR
    for pos in positions:
        for skipped in range(prev + 1, pos):
            rank += comb(SLOTS_PER_BAR - skipped - 1, k - 1)
        prev = pos
        k -= 1
    return rank


@lru_cache(maxsize=None)
def all_patterns() -> tuple[RhythmPattern, ...]:
    return tuple(pattern_from_rank(r) for r in range(NUM_PATTERNS))
