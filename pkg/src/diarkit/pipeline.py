"""End-to-end per-session pipeline and corpus-level sweeps.

Order of stages: ingest -> per-session autoencoder (skipped for the raw
method) -> attention aggregation -> spectral clustering -> timeline.
Every stage draws its randomness from streams derived from one pipeline
seed, so a single seed fixes the whole run.
"""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass, field, replace

import numpy as np

from . import autoencoder as ae
from .aggregation import AaConfig, attention_aggregate
from .clustering import ClusterConfig, spectral_cluster
from .errors import InvalidConfigError
from .rng import mix_seed
from .scoring import DerReport, compute_der
from .sessionio import Session, SpeakerTimeline, labels_to_timeline
from .synth import SynthConfig, generate

METHODS = ("raw", "dr", "ddri")

_SEED_AE = 101
_SEED_CLUSTER = 102
_SEED_SESSION = 103


@dataclass
class PipelineConfig:
    method: str = "ddri"
    speaker_dim: int = 30
    noise_dim: int = 30
    dropout_rate: float = 0.5
    indicator_scale: float = 1.0
    epochs: int = 50
    batch_size: int = 256
    learning_rate: float = 1e-3
    optimizer: str = "gd"
    no_indicator: bool = False
    no_noise_code: bool = False
    aa: AaConfig = field(default_factory=AaConfig)
    eigen_threshold: float = 0.25
    max_speakers: int = 20
    min_speakers: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.method != "ddri" and (self.no_indicator or self.no_noise_code):
            raise InvalidConfigError("ablation flags only apply to the ddri method")

    def ae_config(self, input_dim: int) -> ae.AeConfig:
        if self.method == "dr":
            noise_dim, use_indicator = 0, False
        else:  # ddri, possibly ablated
            noise_dim = 0 if self.no_noise_code else self.noise_dim
            use_indicator = not self.no_indicator
        return ae.AeConfig(
            input_dim=input_dim,
            speaker_dim=self.speaker_dim,
            noise_dim=noise_dim,
            dropout_rate=self.dropout_rate,
            use_indicator=use_indicator,
            indicator_scale=self.indicator_scale,
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            optimizer=self.optimizer,
            seed=mix_seed(self.seed, _SEED_AE),
        )

    def cluster_config(self) -> ClusterConfig:
        return ClusterConfig(
            eigen_threshold=self.eigen_threshold,
            max_speakers=self.max_speakers,
            min_speakers=self.min_speakers,
            seed=mix_seed(self.seed, _SEED_CLUSTER),
        )


@dataclass
class DiariseResult:
    timeline: SpeakerTimeline
    num_speakers: int
    labels: np.ndarray
    model: ae.AutoencoderModel | None


def speaker_codes(session: Session, cfg: PipelineConfig) -> tuple[np.ndarray, ae.AutoencoderModel | None]:
    """Codes fed to clustering: raw speech embeddings or trained speaker codes."""
    speech = session.speech_records()
    if not speech:
        raise InvalidConfigError(f"session {session.session_id} has no speech records")
    if cfg.method == "raw":
        return np.stack([r.vector for r in speech]).astype(np.float64), None
    model = ae.train(session, cfg.ae_config(session.dim))
    return ae.extract_speaker_codes(model, session), model


def diarise_session(session: Session, cfg: PipelineConfig) -> DiariseResult:
    codes, model = speaker_codes(session, cfg)
    codes = attention_aggregate(codes, cfg.aa)
    labels, k = spectral_cluster(codes, cfg.cluster_config())
    timeline = labels_to_timeline(session, labels)
    return DiariseResult(timeline=timeline, num_speakers=k, labels=labels, model=model)


@dataclass
class SweepCorpus:
    """Synthetic corpus spec for sweeps: n sessions with per-session seeds."""

    sessions: int = 20
    min_speakers: int = 3
    max_speakers: int = 9
    duration: float = 90.0
    dim: int = 256
    speaker_spread: float = 0.05
    noise_dims: int = 8
    noise_drift: float = 0.1
    noise_damping: float = 0.96
    nonspeech_fraction: float = 0.2
    turn_mean: float = 3.0
    seed: int = 0

    def configs(self) -> list[SynthConfig]:
        out = []
        for i in range(self.sessions):
            sseed = mix_seed(self.seed, _SEED_SESSION + i)
            span = self.max_speakers - self.min_speakers + 1
            n_spk = self.min_speakers + (i % span)
            out.append(
                SynthConfig(
                    n_speakers=n_spk,
                    duration=self.duration,
                    dim=self.dim,
                    speaker_spread=self.speaker_spread,
                    noise_dims=self.noise_dims,
                    noise_drift=self.noise_drift,
                    noise_damping=self.noise_damping,
                    nonspeech_fraction=self.nonspeech_fraction,
                    turn_mean=self.turn_mean,
                    seed=sseed,
                    session_id=f"synth-{i:03d}",
                )
            )
        return out


def run_sweep_cell(
    session: Session,
    reference: SpeakerTimeline,
    method: str,
    dim: int,
    seed: int,
    base: PipelineConfig | None = None,
) -> DerReport:
    """One (method, dim, seed, session) pipeline run, scored against truth."""
    cfg = replace(
        base or PipelineConfig(),
        method=method,
        speaker_dim=dim,
        seed=seed,
        no_indicator=False if method != "ddri" else (base.no_indicator if base else False),
        no_noise_code=False if method != "ddri" else (base.no_noise_code if base else False),
    )
    result = diarise_session(session, cfg)
    return compute_der(reference, result.timeline, collar=0.0)


def sweep_csv(
    sessions: list[tuple[Session, SpeakerTimeline]],
    dims: list[int],
    methods: list[str],
    seeds: list[int],
    base: PipelineConfig | None = None,
    jobs: int = 1,
) -> str:
    """Full sweep as CSV text (method, dim, seed, session, SC, DER), rows
    sorted lexicographically so output is byte-stable."""
    cells = [
        (method, dim, seed, idx)
        for method in methods
        for dim in dims
        for seed in seeds
        for idx in range(len(sessions))
    ]

    def run(cell):
        method, dim, seed, idx = cell
        session, reference = sessions[idx]
        report = run_sweep_cell(session, reference, method, dim, seed, base)
        return (
            method,
            str(dim),
            str(seed),
            session.session_id,
            f"{report.sc_rate:.6f}",
            f"{report.der:.6f}",
        )

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run, cells))
    else:
        rows = [run(c) for c in cells]

    rows.sort()
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["method", "dim", "seed", "session", "SC", "DER"])
    writer.writerows(rows)
    return buf.getvalue()


def export_codes_csv(session: Session, cfg: PipelineConfig) -> str:
    """Per-record speaker and noise codes as CSV (for external plotting)."""
    if cfg.method == "raw":
        raise InvalidConfigError("code export requires a trained method (dr or ddri)")
    model = ae.train(session, cfg.ae_config(session.dim))
    ds = model.config.speaker_dim
    dn = model.config.noise_dim
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["start", "speech"] + [f"s{i}" for i in range(ds)] + [f"n{i}" for i in range(dn)]
    )
    x = np.stack([r.vector for r in session.records])
    speech = np.array([r.speech for r in session.records], dtype=bool)
    codes = ae.encode_batch(model, x, speech)
    for rec, row in zip(session.records, codes):
        writer.writerow(
            [f"{rec.start:.3f}", int(rec.speech)] + [f"{v:.8g}" for v in row]
        )
    return buf.getvalue()


def silhouette(points: np.ndarray, labels: np.ndarray) -> float:
    """Mean silhouette coefficient over samples (euclidean distances).

    Labels with a single member contribute 0, matching the usual
    convention; requires at least two distinct labels.
    """
    x = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels)
    uniq = np.unique(labels)
    if len(uniq) < 2:
        raise ValueError("silhouette needs at least two clusters")
    d2 = (
        np.sum(x * x, axis=1)[:, None]
        - 2.0 * x @ x.T
        + np.sum(x * x, axis=1)[None, :]
    )
    dist = np.sqrt(np.maximum(d2, 0.0))
    n = x.shape[0]
    scores = np.zeros(n)
    for i in range(n):
        same = labels == labels[i]
        n_same = int(same.sum())
        if n_same <= 1:
            continue
        a = dist[i, same].sum() / (n_same - 1)
        b = min(dist[i, labels == lab].mean() for lab in uniq if lab != labels[i])
        denom = max(a, b)
        scores[i] = 0.0 if denom == 0.0 else (b - a) / denom
    return float(scores.mean())
