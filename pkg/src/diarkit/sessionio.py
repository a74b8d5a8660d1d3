"""Session data model and on-disk formats.

Three file formats:

* embeddings: JSON Lines.  First line is a header object
  ``{"session_id": str, "dim": int}``; every further line is
  ``{"start": float, "end": float, "speech": bool, "vec": [float, ...]}``.
* SAD labels: plain text, one ``start end`` pair (seconds) per line.
* RTTM speaker turns:
  ``SPEAKER <file> <chan> <onset> <dur> <NA> <NA> <speaker> <NA> <NA>``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimMismatchError,
    IoError,
    LengthMismatchError,
    NonFiniteError,
    ParseError,
)

Interval = tuple[float, float]

_EPS = 1e-9


@dataclass
class SegmentGeometry:
    """Sliding-window geometry for cutting speech into embedding segments."""

    window: float = 1.5
    shift: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.shift <= self.window:
            raise ValueError(f"need 0 < shift <= window, got {self.shift}/{self.window}")


@dataclass
class EmbeddingRecord:
    start: float
    end: float
    speech: bool
    vector: np.ndarray

    def interval(self) -> Interval:
        return (self.start, self.end)


@dataclass
class Session:
    session_id: str
    dim: int
    records: list[EmbeddingRecord]
    sad: list[Interval] = field(default_factory=list)

    def speech_records(self) -> list[EmbeddingRecord]:
        return [r for r in self.records if r.speech]


@dataclass
class SpeakerTimeline:
    """Speaker turns as (label, onset, duration) triples."""

    session_id: str
    turns: list[tuple[str, float, float]]

    def speakers(self) -> list[str]:
        seen: dict[str, None] = {}
        for label, _, _ in self.turns:
            seen.setdefault(label)
        return list(seen)

    def total_speech(self) -> float:
        return sum(dur for _, _, dur in self.turns)


def normalize_intervals(intervals: list[Interval]) -> list[Interval]:
    """Sort and merge overlapping or touching intervals; drop empty ones."""
    ivs = sorted((float(s), float(e)) for s, e in intervals if e - s > _EPS)
    out: list[Interval] = []
    for s, e in ivs:
        if out and s <= out[-1][1] + _EPS:
            out[-1] = (out[-1][0], max(out[-1][1], e))
        else:
            out.append((s, e))
    return out


def read_embeddings(path: str) -> Session:
    """Parse an embeddings JSONL file into a Session (no SAD attached)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise IoError(f"cannot read embeddings file {path}: {exc}") from exc
    if not lines:
        raise ParseError(f"empty embeddings file {path}")
    try:
        header = json.loads(lines[0])
        session_id = str(header["session_id"])
        dim = int(header["dim"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad header in {path}: {exc}", line=1) from exc
    if dim < 1:
        raise ParseError(f"bad dim {dim} in {path}", line=1)

    records = []
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
            start = float(obj["start"])
            end = float(obj["end"])
            speech = bool(obj["speech"])
            vec = np.asarray(obj["vec"], dtype=np.float64)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad record: {exc}", line=lineno) from exc
        if vec.ndim != 1 or vec.shape[0] != dim:
            raise DimMismatchError(
                f"vector has {vec.shape[0] if vec.ndim == 1 else '?'} values, header says {dim}",
                line=lineno,
            )
        if not (np.isfinite(start) and np.isfinite(end) and np.all(np.isfinite(vec))):
            raise NonFiniteError(f"line {lineno}: non-finite value")
        if not end > start:
            raise ParseError(f"end {end} <= start {start}", line=lineno)
        records.append(EmbeddingRecord(start, end, speech, vec))
    records.sort(key=lambda r: (r.start, r.end))
    return Session(session_id=session_id, dim=dim, records=records)


def write_embeddings(session: Session, path: str) -> None:
    lines = [json.dumps({"session_id": session.session_id, "dim": session.dim})]
    for r in session.records:
        lines.append(
            json.dumps(
                {"start": r.start, "end": r.end, "speech": bool(r.speech), "vec": list(map(float, r.vector))}
            )
        )
    atomic_write(path, "\n".join(lines) + "\n")


def read_sad(path: str) -> list[Interval]:
    """Parse a SAD lab file ('start end' per line) into normalized intervals."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise IoError(f"cannot read SAD file {path}: {exc}") from exc
    intervals = []
    for lineno, raw in enumerate(lines, start=1):
        parts = raw.split()
        if not parts:
            continue
        if len(parts) < 2:
            raise ParseError(f"expected 'start end', got {raw!r}", line=lineno)
        try:
            s, e = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise ParseError(f"bad interval: {exc}", line=lineno) from exc
        if not (np.isfinite(s) and np.isfinite(e)):
            raise NonFiniteError(f"line {lineno}: non-finite interval")
        intervals.append((s, e))
    return normalize_intervals(intervals)


def write_sad(intervals: list[Interval], path: str) -> None:
    atomic_write(path, "".join(f"{s:.3f} {e:.3f}\n" for s, e in intervals))


def read_rttm(path: str) -> list[SpeakerTimeline]:
    """Parse RTTM SPEAKER records, one timeline per file id (input order)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise IoError(f"cannot read RTTM file {path}: {exc}") from exc
    by_session: dict[str, list[tuple[str, float, float]]] = {}
    for lineno, raw in enumerate(lines, start=1):
        parts = raw.split()
        if not parts or parts[0] != "SPEAKER":
            continue
        if len(parts) < 8:
            raise ParseError(f"short SPEAKER record: {raw!r}", line=lineno)
        try:
            onset = float(parts[3])
            dur = float(parts[4])
        except ValueError as exc:
            raise ParseError(f"bad onset/duration: {exc}", line=lineno) from exc
        if not (np.isfinite(onset) and np.isfinite(dur)):
            raise NonFiniteError(f"line {lineno}: non-finite onset/duration")
        if dur <= 0.0:
            raise ParseError(f"non-positive duration {dur}", line=lineno)
        by_session.setdefault(parts[1], []).append((parts[7], onset, dur))
    return [SpeakerTimeline(sid, turns) for sid, turns in by_session.items()]


def write_rttm(timelines: list[SpeakerTimeline], path: str) -> None:
    """Write RTTM with onset/duration at millisecond precision."""
    lines = []
    for tl in timelines:
        for label, onset, dur in tl.turns:
            lines.append(
                f"SPEAKER {tl.session_id} 1 {onset:.3f} {dur:.3f} <NA> <NA> {label} <NA> <NA>\n"
            )
    atomic_write(path, "".join(lines))


def segment_speech(sad: list[Interval], geom: SegmentGeometry) -> list[Interval]:
    """Cut SAD intervals into sliding-window segments.

    Within an interval of length L >= window, full windows start at the
    interval onset and step by shift; if (L - window) is not a multiple of
    the shift, one extra full window is emitted flush with the interval
    end.  An interval shorter than the window yields itself.  Segments
    never cross interval boundaries.
    """
    segments: list[Interval] = []
    for s, e in sad:
        length = e - s
        if length <= _EPS:
            continue
        if length < geom.window - _EPS:
            segments.append((s, e))
            continue
        k = 0
        while s + k * geom.shift + geom.window <= e + _EPS:
            t = s + k * geom.shift
            segments.append((t, t + geom.window))
            k += 1
        if segments[-1][1] < e - _EPS:
            segments.append((e - geom.window, e))
    return segments


def labels_to_timeline(session: Session, labels) -> SpeakerTimeline:
    """Turn per-speech-record cluster ids into a speaker timeline.

    Adjacent or overlapping same-label segments merge; when consecutive
    segments with different labels overlap, the boundary lands at the
    midpoint of the overlap.
    """
    speech = session.speech_records()
    labels = list(labels)
    if len(labels) != len(speech):
        raise LengthMismatchError(
            f"{len(labels)} labels for {len(speech)} speech records"
        )
    segs = sorted(
        ((r.start, r.end, int(lab)) for r, lab in zip(speech, labels)),
        key=lambda t: (t[0], t[1]),
    )
    # resolve overlaps between consecutive different-label segments
    resolved: list[list[float]] = []
    for start, end, lab in segs:
        if resolved and resolved[-1][2] == lab and start <= resolved[-1][1] + _EPS:
            resolved[-1][1] = max(resolved[-1][1], end)
            continue
        if resolved and end <= resolved[-1][1] + _EPS:
            continue  # swallowed by the previous segment; nothing uncovered
        if resolved and start < resolved[-1][1] - _EPS:
            mid = 0.5 * (start + resolved[-1][1])
            resolved[-1][1] = mid
            start = mid
        resolved.append([start, end, lab])
    turns = [
        (f"spk{lab}", start, end - start)
        for start, end, lab in resolved
        if end - start > _EPS
    ]
    return SpeakerTimeline(session.session_id, turns)


def atomic_write(path: str, content: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)
