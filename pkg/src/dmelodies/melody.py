"""Melody assembly and the 16-slot token encoding.

Bar 1 carries chords I then IV, bar 2 carries V then I. The six onsets of
each bar's rhythm pattern receive, in temporal order, the three arpeggiated
tones of the bar's first chord followed by the three of its second. Slots
without an onset hold the previous note; slots before the very first onset
are rests.
"""
from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .factor_space import OCTAVES, FactorTuple, Scale, factors_to_index
from .music_theory import CADENCE, ChordDegree, Pitch, arpeggiate, chord_tones, name_to_midi
from .rhythm import NOTES_PER_BAR, SLOTS_PER_BAR, pattern_from_rank

HOLD = "__"
REST = "R"
SEQ_LEN = 2 * SLOTS_PER_BAR
NUM_NOTES = 2 * NOTES_PER_BAR


class Note(NamedTuple):
    slot: int
    pitch: Pitch


class Melody(NamedTuple):
    notes: tuple[Note, ...]
    factor_index: int

    @property
    def slots(self) -> tuple[int, ...]:
        return tuple(n.slot for n in self.notes)


def synthesize(t: FactorTuple) -> Melody:
    index = factors_to_index(t)
    notes = []
    bars = ((t.rhythm_bar1, CADENCE[:2], t.arps[:2]), (t.rhythm_bar2, CADENCE[2:], t.arps[2:]))
    for bar, (rank, degrees, arps) in enumerate(bars):
        pitches = []
        for degree, arp in zip(degrees, arps):
            pitches.extend(arpeggiate(chord_tones(t.tonic, t.octave, t.scale, degree), arp))
        positions = pattern_from_rank(rank).positions
        notes.extend(Note(bar * SLOTS_PER_BAR + pos, p) for pos, p in zip(positions, pitches))
    return Melody(tuple(notes), index)


def to_tokens(m: Melody) -> tuple[str, ...]:
    by_slot = {n.slot: n.pitch.name for n in m.notes}
    tokens = []
    started = False
    for s in range(SEQ_LEN):
        if s in by_slot:
            tokens.append(by_slot[s])
            started = True
        else:
            tokens.append(HOLD if started else REST)
    return tuple(tokens)


@lru_cache(maxsize=None)
def _note_tokens() -> tuple[str, ...]:
    names = set()
    for tonic in range(12):
        for octave in OCTAVES:
            for kind in Scale:
                for degree in ChordDegree:
                    names.update(p.name for p in chord_tones(tonic, octave, kind, degree))
    return tuple(sorted(names, key=lambda nm: (name_to_midi(nm), nm)))


@lru_cache(maxsize=None)
def token_vocabulary() -> tuple[str, ...]:
    """Hold and Rest first, then note names ordered by (MIDI number, name).

    Every melody realizes every tone of its three chords, so the note tokens of
    the full dataset are exactly the chord tones over all tonic/octave/scale
    combinations.
    """
    return (HOLD, REST) + _note_tokens()


@lru_cache(maxsize=None)
def token_to_id() -> dict[str, int]:
    return {tok: i for i, tok in enumerate(token_vocabulary())}


def encode(tokens: Sequence[str], vocab: Sequence[str] | None = None) -> np.ndarray:
    lookup = token_to_id() if vocab is None else {t: i for i, t in enumerate(vocab)}
    try:
        return np.array([lookup[t] for t in tokens], dtype=np.int64)
    except KeyError as exc:
        raise KeyError(f"unknown token {exc.args[0]!r}") from None


def one_hot(tokens: Sequence[str], vocab: Sequence[str] | None = None) -> np.ndarray:
    vocab = token_vocabulary() if vocab is None else vocab
    ids = encode(tokens, vocab)
    out = np.zeros((len(ids), len(vocab)), dtype=np.float64)
    out[np.arange(len(ids)), ids] = 1.0
    return out


def decode_one_hot(matrix: np.ndarray, vocab: Sequence[str] | None = None) -> tuple[str, ...]:
    vocab = token_vocabulary() if vocab is None else vocab
    return tuple(vocab[i] for i in np.argmax(matrix, axis=-1))


@lru_cache(maxsize=None)
def chord_token_table() -> np.ndarray:
    """Token ids of every chord tone: shape (12 tonics, 3 octaves, 3 scales, 3 chords, 3 tones).

    Chord axis is (I, IV, V); tones ascend.
    """
    lookup = token_to_id()
    table = np.empty((12, len(OCTAVES), len(Scale), 3, 3), dtype=np.int32)
    for tonic in range(12):
        for o, octave in enumerate(OCTAVES):
            for kind in Scale:
                for c, degree in enumerate((ChordDegree.I, ChordDegree.IV, ChordDegree.V)):
                    tones = chord_tones(tonic, octave, kind, degree)
                    table[tonic, o, kind, c] = [lookup[p.name] for p in tones]
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def midi_table() -> np.ndarray:
    """MIDI number of every token id; -1 for Hold and Rest."""
    out = np.array([-1, -1] + [name_to_midi(n) for n in _note_tokens()], dtype=np.int64)
    out.setflags(write=False)
    return out
