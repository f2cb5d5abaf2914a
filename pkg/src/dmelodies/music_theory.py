"""Scales, I-IV-V-I chord tones, pitch spelling and arpeggiation.

Chords are built by stacking scale steps: the root is the scale member at
semitone offset 0 (I), 5 (IV) or 7 (V) above the tonic and the chord adds the
members two and four scale steps above it, lifting by an octave whenever the
stack wraps past the end of the scale. This works the same way for the
heptatonic scales and the hexatonic blues scale.
"""
from __future__ import annotations

import enum
import re
from functools import lru_cache
from typing import NamedTuple, Sequence

from .factor_space import Arp, Scale

INTERVALS: dict[Scale, tuple[int, ...]] = {
    Scale.MAJOR: (0, 2, 4, 5, 7, 9, 11),
    Scale.HARMONIC_MINOR: (0, 2, 3, 5, 7, 8, 11),
    Scale.BLUES: (0, 3, 5, 6, 7, 10),
}

LETTERS = "CDEFGAB"
_LETTER_PC = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}
_ACCIDENTALS = {-2: "bb", -1: "b", 0: "", 1: "#", 2: "##"}

_SHARP_NAMES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")
_FLAT_NAMES = ("C", "Db", "D", "Eb", "E", "F", "Gb", "G", "Ab", "A", "Bb", "B")

# tonic spelling for the two key-signature scales, fewest accidentals
_TONIC_NAMES = {
    Scale.MAJOR: ("C", "Db", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B"),
    Scale.HARMONIC_MINOR: ("C", "C#", "D", "Eb", "E", "F", "F#", "G", "G#", "A", "Bb", "B"),
}

TONIC_NAMES = _SHARP_NAMES

_NAME_RE = re.compile(r"^([A-G])(bb|b|##|#)?(-?\d+)$")


class ChordDegree(enum.IntEnum):
    I = 0
    IV = 5
    V = 7


CADENCE = (ChordDegree.I, ChordDegree.IV, ChordDegree.V, ChordDegree.I)


class Pitch(NamedTuple):
    name: str
    midi: int

    def __str__(self) -> str:
        return self.name


def tonic_midi(tonic: int, octave: int) -> int:
    """MIDI number of the tonic in scientific octave numbering (C4 = 60)."""
    return 12 * (octave + 1) + tonic


def name_to_midi(name: str) -> int:
    m = _NAME_RE.match(name)
    if m is None:
        raise ValueError(f"not a note name: {name!r}")
    letter, acc, octave = m.group(1), m.group(2) or "", int(m.group(3))
    shift = {"": 0, "#": 1, "##": 2, "b": -1, "bb": -2}[acc]
    return 12 * (octave + 1) + _LETTER_PC[letter] + shift


def _spell(letter: str, midi: int) -> str:
    natural = _LETTER_PC[letter]
    shift = (midi - natural + 6) % 12 - 6
    if shift not in _ACCIDENTALS:
        raise ValueError(f"cannot spell MIDI {midi} on letter {letter}")
    octave = (midi - shift - natural) // 12 - 1
    return f"{letter}{_ACCIDENTALS[shift]}{octave}"


@lru_cache(maxsize=None)
def _letters(tonic: int, kind: Scale) -> tuple[str, ...]:
    """Letter name for each scale member (index-aligned with INTERVALS)."""
    intervals = INTERVALS[kind]
    if kind == Scale.BLUES:
        names = []
        for step, iv in enumerate(intervals):
            table = _SHARP_NAMES if step == 3 else _FLAT_NAMES  # step 3 is the raised fourth
            names.append(table[(tonic + iv) % 12][0])
        return tuple(names)
    start = LETTERS.index(_TONIC_NAMES[kind][tonic][0])
    return tuple(LETTERS[(start + k) % 7] for k in range(len(intervals)))


def spell(tonic: int, kind: Scale, step: int, midi: int) -> str:
    """Spelled name of ``midi`` as scale member ``step`` in the given scale."""
    return _spell(_letters(tonic, Scale(kind))[step % len(INTERVALS[Scale(kind)])], midi)


def scale_pitches(tonic: int, octave: int, kind: Scale) -> list[Pitch]:
    kind = Scale(kind)
    base = tonic_midi(tonic, octave)
    return [Pitch(spell(tonic, kind, k, base + iv), base + iv) for k, iv in enumerate(INTERVALS[kind])]


def _scale_member(tonic: int, octave: int, kind: Scale, step: int) -> Pitch:
    intervals = INTERVALS[kind]
    n = len(intervals)
    midi = tonic_midi(tonic, octave) + 12 * (step // n) + intervals[step % n]
    return Pitch(spell(tonic, kind, step, midi), midi)


@lru_cache(maxsize=None)
def chord_tones(tonic: int, octave: int, kind: Scale, degree: ChordDegree) -> tuple[Pitch, Pitch, Pitch]:
    """Ascending triad on ``degree``; tones above the scale octave are lifted."""
    kind = Scale(kind)
    root = INTERVALS[kind].index(int(ChordDegree(degree)))
    return tuple(_scale_member(tonic, octave, kind, root + k) for k in (0, 2, 4))


def arpeggiate(tones: Sequence[Pitch], direction: Arp) -> tuple[Pitch, ...]:
    if Arp(direction) == Arp.DOWN:
        return tuple(reversed(tones))
    return tuple(tones)
