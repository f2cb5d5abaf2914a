"""Minimal Standard MIDI File support: a format-0 writer and a small reader."""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Iterable, Sequence

TICKS_PER_QUARTER = 480
TICKS_PER_SLOT = TICKS_PER_QUARTER // 2  # eighth note
TEMPO_BPM = 120
PROGRAM = 0
VELOCITY = 100
CHANNEL = 0


class MidiError(ValueError):
    pass


def _varlen(value: int) -> bytes:
    if value < 0:
        raise MidiError("negative delta time")
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(out))


def encode_notes(
    notes: Iterable[tuple[int, int, int]],
    total_ticks: int,
    ticks_per_quarter: int = TICKS_PER_QUARTER,
    tempo_bpm: int = TEMPO_BPM,
    program: int = PROGRAM,
) -> bytes:
    """Serialize ``(start_tick, end_tick, midi_note)`` triples as a format-0 file.

    The end-of-track event sits at ``total_ticks``.
    """
    events = []  # (tick, order, payload); note-offs sort before note-ons at a tick
    for start, end, note in notes:
        if not 0 <= note <= 127 or end <= start:
            raise MidiError(f"bad note ({start}, {end}, {note})")
        events.append((start, 1, bytes([0x90 | CHANNEL, note, VELOCITY])))
        events.append((end, 0, bytes([0x80 | CHANNEL, note, 0x40])))
    events.sort(key=lambda e: (e[0], e[1]))
    usec = round(60_000_000 / tempo_bpm)
    track = bytearray()
    track += _varlen(0) + b"\xff\x51\x03" + usec.to_bytes(3, "big")
    track += _varlen(0) + b"\xff\x58\x04\x04\x02\x18\x08"
    track += _varlen(0) + bytes([0xC0 | CHANNEL, program])
    now = 0
    for tick, _, payload in events:
        track += _varlen(tick - now) + payload
        now = tick
    if total_ticks < now:
        raise MidiError("total_ticks precedes the last event")
    track += _varlen(total_ticks - now) + b"\xff\x2f\x00"
    header = b"MThd" + struct.pack(">IHHH", 6, 0, 1, ticks_per_quarter)
    return header + b"MTrk" + struct.pack(">I", len(track)) + bytes(track)


def melody_note_events(slots: Sequence[int], pitches: Sequence[int], seq_len: int = 16) -> list[tuple[int, int, int]]:
    """Each note lasts until the next onset; the last one until the sequence end."""
    ends = list(slots[1:]) + [seq_len]
    return [(s * TICKS_PER_SLOT, e * TICKS_PER_SLOT, p) for s, e, p in zip(slots, ends, pitches)]


@dataclass
class ParsedMidi:
    format: int
    division: int
    tempo_usec: int | None = None
    program: int | None = None
    notes: list[tuple[int, int, int]] = field(default_factory=list)
    end_tick: int = 0


def _read_varlen(data: bytes, pos: int) -> tuple[int, int]:
    value = 0
    while True:
        b = data[pos]
        pos += 1
        value = (value << 7) | (b & 0x7F)
        if not b & 0x80:
            return value, pos


def parse(data: bytes) -> ParsedMidi:
    """Read a single-track file back into absolute-tick notes."""
    if data[:4] != b"MThd":
        raise MidiError("missing MThd")
    length, fmt, ntrks, division = struct.unpack(">IHHH", data[4:14])
    pos = 8 + length
    if ntrks != 1 or data[pos:pos + 4] != b"MTrk":
        raise MidiError("expected exactly one track")
    (tlen,) = struct.unpack(">I", data[pos + 4:pos + 8])
    pos += 8
    stop = pos + tlen
    out = ParsedMidi(fmt, division)
    tick = 0
    status = None
    open_notes: dict[int, int] = {}
    while pos < stop:
        delta, pos = _read_varlen(data, pos)
        tick += delta
        if data[pos] & 0x80:
            status = data[pos]
            pos += 1
        if status is None:
            raise MidiError("running status without a status byte")
        if status == 0xFF:
            kind = data[pos]
            mlen, pos = _read_varlen(data, pos + 1)
            body = data[pos:pos + mlen]
            pos += mlen
            if kind == 0x51:
                out.tempo_usec = int.from_bytes(body, "big")
            elif kind == 0x2F:
                out.end_tick = tick
                break
            continue
        hi = status & 0xF0
        if hi in (0xC0, 0xD0):
            if hi == 0xC0:
                out.program = data[pos]
            pos += 1
            continue
        a, b = data[pos], data[pos + 1]
        pos += 2
        if hi == 0x90 and b > 0:
            open_notes[a] = tick
        elif hi == 0x80 or (hi == 0x90 and b == 0):
            if a not in open_notes:
                raise MidiError(f"note-off without note-on for {a}")
            out.notes.append((open_notes.pop(a), tick, a))
    out.notes.sort()
    return out
