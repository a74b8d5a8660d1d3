"""Pydantic request/response models for the HTTP service.

File-shaped payloads travel as strings in the exact on-disk formats
(embeddings JSONL, SAD lab text, RTTM text), so the CLI can pass file
contents through unchanged and write responses verbatim.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class AaConfigModel(BaseModel):
    enabled: bool = True
    temperature: float | None = None
    iterations: int = 1
    self_weight: float = 0.5


class PipelineConfigModel(BaseModel):
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
    aa: AaConfigModel = Field(default_factory=AaConfigModel)
    eigen_threshold: float = 0.25
    max_speakers: int = 20
    min_speakers: int = 1
    seed: int = 0


class SynthConfigModel(BaseModel):
    n_speakers: int = 2
    duration: float = 60.0
    dim: int = 256
    speaker_spread: float = 0.05
    noise_dims: int = 8
    noise_drift: float = 0.1
    noise_damping: float = 0.96
    nonspeech_fraction: float = 0.2
    turn_mean: float = 3.0
    seed: int = 0
    session_id: str = "synth"


class DiariseRequest(BaseModel):
    embeddings_jsonl: str
    sad: str
    config: PipelineConfigModel = Field(default_factory=PipelineConfigModel)


class DiariseResponse(BaseModel):
    session_id: str
    num_speakers: int
    rttm: str


class ScoreRequest(BaseModel):
    ref_rttm: str
    hyp_rttm: str
    collar: float = 0.0


class DerReportModel(BaseModel):
    session_id: str
    total_scored: float
    fa: float
    ms: float
    sc: float
    der: float
    fa_rate: float
    ms_rate: float
    sc_rate: float
    mapping: list[tuple[str, str]]


class ScoreResponse(BaseModel):
    reports: list[DerReportModel]
    overall: DerReportModel


class SynthRequest(BaseModel):
    config: SynthConfigModel = Field(default_factory=SynthConfigModel)


class SynthResponse(BaseModel):
    session_id: str
    embeddings_jsonl: str
    sad: str
    rttm: str


class SweepSessionPayload(BaseModel):
    embeddings_jsonl: str
    sad: str
    ref_rttm: str


class SweepCorpusModel(BaseModel):
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


class SweepRequest(BaseModel):
    dims: list[int]
    methods: list[str]
    seeds: list[int]
    synth: SweepCorpusModel | None = None
    sessions: list[SweepSessionPayload] | None = None
    config: PipelineConfigModel = Field(default_factory=PipelineConfigModel)
    jobs: int = 1


class SweepResponse(BaseModel):
    csv: str


class ExportCodesRequest(BaseModel):
    embeddings_jsonl: str
    sad: str
    config: PipelineConfigModel = Field(default_factory=PipelineConfigModel)


class ExportCodesResponse(BaseModel):
    csv: str


class HealthResponse(BaseModel):
    status: str
    version: str
