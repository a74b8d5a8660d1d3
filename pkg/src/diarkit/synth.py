"""Seeded synthetic sessions: alternating speaker turns and pauses, with
embeddings built from near-orthogonal speaker centroids plus ambient
Gaussian spread plus a structured noise component.

The structured noise lives in a low-dimensional direction basis shared by
all speakers; its coefficients follow a damped per-segment random walk
(stationary AR(1)), so the noise environment drifts through quasi-stable
states over a session.  That drift splits same-speaker segments apart and
pulls time-adjacent segments of different speakers together, which is
exactly the failure mode the disentangling autoencoder is meant to
absorb.  Damping keeps the noise magnitude stationary: an undamped walk
grows without bound and degenerates into one session-global offset, which
merges clusters instead of splitting them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError
from .rng import Rng
from .sessionio import (
    EmbeddingRecord,
    Interval,
    SegmentGeometry,
    Session,
    SpeakerTimeline,
    normalize_intervals,
    segment_speech,
)

_MIN_TURN = 1e-3


@dataclass
class SynthConfig:
    n_speakers: int
    duration: float
    dim: int = 256
    speaker_spread: float = 0.05
    noise_dims: int = 8
    noise_drift: float = 0.1
    noise_damping: float = 0.96  # AR(1) retention per segment step
    nonspeech_fraction: float = 0.2
    turn_mean: float = 3.0
    seed: int = 0
    session_id: str = "synth"

    def __post_init__(self):
        if self.n_speakers < 1:
            raise InvalidConfigError("n_speakers must be >= 1")
        if self.duration <= 0.0:
            raise InvalidConfigError("duration must be positive")
        if not 0.0 <= self.nonspeech_fraction < 1.0:
            raise InvalidConfigError("nonspeech_fraction must be in [0, 1)")
        if self.dim < 1 or self.noise_dims < 0 or self.noise_dims > self.dim:
            raise InvalidConfigError("need 0 <= noise_dims <= dim")
        if self.turn_mean <= 0.0:
            raise InvalidConfigError("turn_mean must be positive")
        if not 0.0 <= self.noise_damping < 1.0:
            raise InvalidConfigError("noise_damping must be in [0, 1)")


def _exponential(rng: Rng, mean: float) -> float:
    u = rng.random()
    return -mean * np.log(max(1.0 - u, 2.0 ** -53))


def generate(cfg: SynthConfig, geometry: SegmentGeometry | None = None) -> tuple[Session, SpeakerTimeline]:
    """Build one (Session, reference SpeakerTimeline) pair.

    Turn/pause lengths are exponential with means chosen so the expected
    speech coverage is (1 - nonspeech_fraction) * duration.  Speech
    segments carry a unit-norm speaker centroid; non-speech segments carry
    structured noise and ambient spread only.  Bit-identical for a fixed
    seed.
    """
    geom = geometry or SegmentGeometry()
    rng = Rng(cfg.seed)
    turn_rng = rng.spawn(1)
    space_rng = rng.spawn(2)
    noise_rng = rng.spawn(3)

    f = cfg.nonspeech_fraction
    pause_mean = cfg.turn_mean * f / (1.0 - f) if f > 0.0 else 0.0

    turns: list[tuple[str, float, float]] = []
    t = 0.0
    bag: list[int] = []
    while t < cfg.duration:
        if not bag:
            # shuffled round-robin keeps per-speaker time roughly balanced
            bag = [int(v) for v in turn_rng.permutation(cfg.n_speakers)]
        spk = bag.pop(0)
        length = min(_exponential(turn_rng, cfg.turn_mean), cfg.duration - t)
        if length > _MIN_TURN:
            turns.append((f"spk{spk}", t, length))
        t += length
        if pause_mean > 0.0:
            t += _exponential(turn_rng, pause_mean)
    timeline = SpeakerTimeline(cfg.session_id, turns)

    sad = normalize_intervals([(onset, onset + dur) for _, onset, dur in turns])
    pauses = _complement(sad, cfg.duration)
    speech_segs = segment_speech(sad, geom)
    nonspeech_segs = segment_speech(pauses, geom)

    centroids = _unit_rows(space_rng, cfg.n_speakers, cfg.dim)
    noise_basis = _unit_rows(space_rng, cfg.noise_dims, cfg.dim)

    tagged = sorted(
        [(s, e, True) for s, e in speech_segs] + [(s, e, False) for s, e in nonspeech_segs],
        key=lambda seg: (seg[0], seg[1]),
    )
    # stationary start so the noise level is uniform across the session
    rho = cfg.noise_damping
    stationary = cfg.noise_drift / np.sqrt(1.0 - rho * rho)
    coeff = stationary * noise_rng.normal(cfg.noise_dims) if cfg.noise_dims > 0 else np.zeros(0)
    records = []
    for s, e, is_speech in tagged:
        if cfg.noise_dims > 0 and cfg.noise_drift > 0.0:
            coeff = rho * coeff + cfg.noise_drift * noise_rng.normal(cfg.noise_dims)
        vec = noise_basis.T @ coeff if cfg.noise_dims > 0 else np.zeros(cfg.dim)
        vec = vec + cfg.speaker_spread * noise_rng.normal(cfg.dim)
        if is_speech:
            vec = vec + centroids[_dominant_speaker(turns, s, e)]
        records.append(EmbeddingRecord(s, e, is_speech, vec))

    session = Session(cfg.session_id, cfg.dim, records, sad=sad)
    return session, timeline


def _unit_rows(rng: Rng, rows: int, dim: int) -> np.ndarray:
    if rows == 0:
        return np.zeros((0, dim))
    m = rng.normal(rows * dim).reshape(rows, dim)
    return m / np.linalg.norm(m, axis=1, keepdims=True)


def _complement(intervals: list[Interval], duration: float) -> list[Interval]:
    out = []
    cur = 0.0
    for s, e in intervals:
        if s > cur:
            out.append((cur, s))
        cur = max(cur, e)
    if cur < duration:
        out.append((cur, duration))
    return [(s, e) for s, e in out if e - s > 1e-9]


def _dominant_speaker(turns: list[tuple[str, float, float]], s: float, e: float) -> int:
    """Index of the speaker with the largest overlap with [s, e)."""
    best_idx = 0
    best = -1.0
    for label, onset, dur in turns:
        ov = min(e, onset + dur) - max(s, onset)
        if ov > best:
            best = ov
            best_idx = int(label[3:])
    return best_idx
