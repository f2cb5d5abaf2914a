"""Materialize the dataset to disk: factor CSV, token text, MIDI files and a manifest."""
from __future__ import annotations

import hashlib
import json
import logging
import os
import shutil
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import MANIFEST_VERSION, __version__, kernels, midi
from .factor_space import (
    FACTOR_NAMES,
    FACTOR_SIZES,
    OCTAVES,
    Arp,
    Scale,
    cardinality,
    check_range,
    codes_to_index,
    index_to_codes,
    index_to_factors,
)
from .melody import HOLD, REST, SEQ_LEN, synthesize, token_vocabulary
from .music_theory import INTERVALS, TONIC_NAMES
from .rhythm import all_patterns

log = logging.getLogger(__name__)

CSV_HEADER = "index," + ",".join(FACTOR_NAMES)
FACTORS_FILE = "factors.csv"
TOKENS_FILE = "tokens.txt"
MIDI_DIR = "midi"
MANIFEST_FILE = "manifest.json"
FORMATS = ("csv", "tokens", "midi")

_CHUNK = 1 << 16


def _chunks(lo: int, hi: int, size: int = _CHUNK) -> Iterable[tuple[int, int]]:
    for a in range(lo, hi, size):
        yield a, min(a + size, hi)


def _csv_lines(lo: int, hi: int) -> str:
    codes = index_to_codes(np.arange(lo, hi))
    rows = np.column_stack([np.arange(lo, hi), codes])
    return "".join(",".join(map(str, r)) + "\n" for r in rows.tolist())


def _token_lines(lo: int, hi: int) -> str:
    vocab = token_vocabulary()
    ids = kernels.synth_token_ids(lo, hi)
    return "".join(" ".join([vocab[t] for t in row]) + "\n" for row in ids.tolist())


def write_factors_csv(lo: int, hi: int, path, header: bool = True) -> int:
    lo, hi = check_range(lo, hi)
    with open(path, "w", newline="\n") as fh:
        if header:
            fh.write(CSV_HEADER + "\n")
        for a, b in _chunks(lo, hi):
            fh.write(_csv_lines(a, b))
    return hi - lo


def write_tokens(lo: int, hi: int, path) -> int:
    lo, hi = check_range(lo, hi)
    with open(path, "w", newline="\n") as fh:
        for a, b in _chunks(lo, hi):
            fh.write(_token_lines(a, b))
    return hi - lo


def midi_bytes(index: int) -> bytes:
    m = synthesize(index_to_factors(index))
    events = midi.melody_note_events(m.slots, [n.pitch.midi for n in m.notes], SEQ_LEN)
    return midi.encode_notes(events, SEQ_LEN * midi.TICKS_PER_SLOT)


def write_midi(index: int, path) -> Path:
    path = Path(path)
    path.write_bytes(midi_bytes(index))
    return path


def midi_filename(index: int) -> str:
    return f"{index:07d}.mid"


def read_factors_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(indices, codes)`` from a factor CSV."""
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        data = np.loadtxt(fh, delimiter=",", dtype=np.int64, ndmin=2)
    if data.shape[1] != len(FACTOR_NAMES) + 1:
        raise ValueError(f"{path}: expected {len(FACTOR_NAMES) + 1} columns")
    return data[:, 0], data[:, 1:]


def read_token_ids(path) -> np.ndarray:
    lookup = {t: i for i, t in enumerate(token_vocabulary())}
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            toks = line.split()
            if len(toks) != SEQ_LEN:
                raise ValueError(f"{path}:{lineno}: expected {SEQ_LEN} tokens, got {len(toks)}")
            try:
                rows.append([lookup[t] for t in toks])
            except KeyError as exc:
                raise ValueError(f"{path}:{lineno}: unknown token {exc.args[0]!r}") from None
    return np.array(rows, dtype=np.int16).reshape(-1, SEQ_LEN)


@dataclass
class UniquenessReport:
    checked: int
    duplicates: int
    collisions: list[tuple[int, int]] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"checked": self.checked, "duplicates": self.duplicates,
                "collisions": [list(c) for c in self.collisions]}


def find_duplicates(token_ids: np.ndarray, indices: Sequence[int] | None = None,
                    max_pairs: int = 100) -> UniquenessReport:
    """Group identical rows by their raw bytes; each row beyond the first of a group counts once."""
    ids = np.ascontiguousarray(token_ids)
    n = len(ids)
    indices = np.arange(n) if indices is None else np.asarray(indices)
    if n == 0:
        return UniquenessReport(0, 0)
    keys = ids.view(np.dtype((np.void, ids.dtype.itemsize * ids.shape[1]))).ravel()
    _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    dup_rows = np.flatnonzero(first[inverse] != np.arange(n))
    pairs = [(int(indices[first[inverse[r]]]), int(indices[r])) for r in dup_rows[:max_pairs]]
    return UniquenessReport(n, len(dup_rows), pairs)


def verify_uniqueness(lo: int = 0, hi: int | None = None, indices: Sequence[int] | None = None) -> UniquenessReport:
    """Check that the token sequences of a range (or explicit index list) are pairwise distinct."""
    if indices is None:
        lo, hi = check_range(lo, hi)
        parts = [kernels.synth_token_ids(a, b) for a, b in _chunks(lo, hi, 1 << 18)]
        ids = np.concatenate(parts) if parts else np.empty((0, SEQ_LEN), np.int16)
        return find_duplicates(ids, np.arange(lo, hi))
    indices = np.asarray(indices, dtype=np.int64)
    rows = [kernels.synth_token_ids(i, i + 1)[0] for i in indices.tolist()]
    ids = np.array(rows, dtype=np.int16).reshape(-1, SEQ_LEN)
    return find_duplicates(ids, indices)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def encodings() -> dict:
    return {
        "order": list(FACTOR_NAMES),
        "sizes": dict(zip(FACTOR_NAMES, FACTOR_SIZES)),
        "tonic": {str(i): n for i, n in enumerate(TONIC_NAMES)},
        "octave": "literal octave number, one of " + ", ".join(map(str, OCTAVES)),
        "scale": {str(int(s)): s.name for s in Scale},
        "scale_intervals": {s.name: list(INTERVALS[s]) for s in Scale},
        "rhythm": "rank into rhythm_dictionary",
        "arp_chord": {str(int(a)): a.name for a in Arp},
    }


def build_manifest(lo: int, hi: int, formats: Sequence[str], files: dict) -> dict:
    vocab = token_vocabulary()
    return {
        "version": MANIFEST_VERSION,
        "package_version": __version__,
        "range": [lo, hi],
        "cardinality": cardinality(),
        "formats": list(formats),
        "factor_encodings": encodings(),
        "rhythm_dictionary": [list(p.positions) for p in all_patterns()],
        "chords": {"cadence": ["I", "IV", "V", "I"], "root_offsets": {"I": 0, "IV": 5, "V": 7},
                   "stacking": "scale steps 0, 2, 4 above the root, octave lift on wrap"},
        "tokens": {"hold": HOLD, "rest": REST, "octave_in_note_name": True, "length": SEQ_LEN},
        "vocabulary": list(vocab),
        "vocabulary_size": len(vocab),
        "midi": {"format": 0, "ticks_per_quarter": midi.TICKS_PER_QUARTER,
                 "ticks_per_slot": midi.TICKS_PER_SLOT, "tempo_bpm": midi.TEMPO_BPM,
                 "program": midi.PROGRAM, "velocity": midi.VELOCITY},
        "files": files,
    }


def write_manifest(manifest: dict, path) -> None:
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _write_shard(out_dir: str, lo: int, hi: int, formats: tuple[str, ...], shard: int) -> dict:
    out = Path(out_dir)
    parts = out / ".parts"
    written = {}
    if "csv" in formats:
        p = parts / f"factors.{shard:05d}"
        write_factors_csv(lo, hi, p, header=False)
        written["csv"] = str(p)
    if "tokens" in formats:
        p = parts / f"tokens.{shard:05d}"
        write_tokens(lo, hi, p)
        written["tokens"] = str(p)
    if "midi" in formats:
        for i in range(lo, hi):
            write_midi(i, out / MIDI_DIR / midi_filename(i))
    return written


def _concat(paths: Sequence[str], dest: Path, header: str | None = None) -> None:
    with open(dest, "wb") as out:
        if header is not None:
            out.write((header + "\n").encode())
        for p in paths:
            with open(p, "rb") as fh:
                shutil.copyfileobj(fh, out)


def generate(out_dir, lo: int = 0, hi: int | None = None, formats: Sequence[str] = ("csv", "tokens"),
             workers: int = 1) -> dict:
    """Write the requested formats for ``[lo, hi)`` into ``out_dir`` and return the manifest.

    Work is split into contiguous shards; shard files are concatenated in
    range order so the output does not depend on ``workers``.
    """
    lo, hi = check_range(lo, hi)
    formats = tuple(f for f in FORMATS if f in formats)
    unknown = set(formats) - set(FORMATS)
    if unknown:
        raise ValueError(f"unknown formats: {sorted(unknown)}")
    out = Path(out_dir)
    (out / ".parts").mkdir(parents=True, exist_ok=True)
    if "midi" in formats:
        (out / MIDI_DIR).mkdir(exist_ok=True)
    workers = max(1, int(workers))
    n_shards = max(1, min(workers * 4, (hi - lo) // _CHUNK + 1))
    edges = np.linspace(lo, hi, n_shards + 1).round().astype(int).tolist()
    shards = [(edges[k], edges[k + 1], k) for k in range(n_shards)]
    if workers == 1:
        results = [_write_shard(str(out), a, b, formats, k) for a, b, k in shards]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_write_shard, str(out), a, b, formats, k) for a, b, k in shards]
            results = [f.result() for f in futures]
    files = {}
    if "csv" in formats:
        _concat([r["csv"] for r in results], out / FACTORS_FILE, CSV_HEADER)
        files[FACTORS_FILE] = {"rows": hi - lo, "sha256": sha256_file(out / FACTORS_FILE)}
    if "tokens" in formats:
        _concat([r["tokens"] for r in results], out / TOKENS_FILE)
        files[TOKENS_FILE] = {"rows": hi - lo, "sha256": sha256_file(out / TOKENS_FILE)}
    if "midi" in formats:
        h = hashlib.sha256()
        for i in range(lo, hi):
            h.update(midi_filename(i).encode())
            h.update(bytes.fromhex(sha256_file(out / MIDI_DIR / midi_filename(i))))
        files[MIDI_DIR] = {"count": hi - lo, "sha256_of_digests": h.hexdigest()}
    shutil.rmtree(out / ".parts")
    manifest = build_manifest(lo, hi, formats, files)
    write_manifest(manifest, out / MANIFEST_FILE)
    log.info("wrote %d items to %s", hi - lo, out)
    return manifest


@dataclass
class VerifyReport:
    checked: int
    duplicates: int
    collisions: list
    csv_mismatches: int
    token_mismatches: int
    digest_mismatches: list[str]

    @property
    def ok(self) -> bool:
        return not (self.duplicates or self.csv_mismatches or self.token_mismatches or self.digest_mismatches)

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["collisions"] = [list(c) for c in self.collisions]
        d["ok"] = self.ok
        return d


def verify_output(out_dir, lo: int | None = None, hi: int | None = None) -> VerifyReport:
    """Re-check a generated directory: digests, uniqueness and index round-trips."""
    out = Path(out_dir)
    manifest = json.loads((out / MANIFEST_FILE).read_text())
    m_lo, m_hi = manifest["range"]
    lo = m_lo if lo is None else lo
    hi = m_hi if hi is None else hi
    if not m_lo <= lo <= hi <= m_hi:
        raise ValueError(f"range [{lo}, {hi}) not covered by generated range [{m_lo}, {m_hi})")
    bad_digests = [name for name, info in manifest["files"].items()
                   if "sha256" in info and sha256_file(out / name) != info["sha256"]]
    csv_bad = tok_bad = 0
    expected = np.concatenate([kernels.synth_token_ids(a, b) for a, b in _chunks(lo, hi, 1 << 18)]) \
        if hi > lo else np.empty((0, SEQ_LEN), np.int16)
    if (out / FACTORS_FILE).exists():
        idx, codes = read_factors_csv(out / FACTORS_FILE)
        sel = slice(lo - m_lo, hi - m_lo)
        idx, codes = idx[sel], codes[sel]
        csv_bad = int(np.sum(idx != np.arange(lo, hi)))
        csv_bad += int(np.sum(codes_to_index(codes) != idx))
        csv_bad += int(np.sum(np.any(index_to_codes(idx) != codes, axis=1)))
    if (out / TOKENS_FILE).exists():
        ids = read_token_ids(out / TOKENS_FILE)[lo - m_lo:hi - m_lo]
        tok_bad = int(np.sum(np.any(ids != expected, axis=1)))
        report = find_duplicates(ids, np.arange(lo, hi))
    else:
        report = find_duplicates(expected, np.arange(lo, hi))
    return VerifyReport(report.checked, report.duplicates, report.collisions, csv_bad, tok_bad, bad_digests)
