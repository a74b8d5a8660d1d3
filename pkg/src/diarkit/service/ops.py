"""Service operations: pure functions from request models to response
models.  The FastAPI routes and the CLI both call these."""

from __future__ import annotations

import os
import tempfile

from .. import __version__
from ..aggregation import AaConfig
from ..errors import DiarkitError
from ..pipeline import PipelineConfig, SweepCorpus, diarise_session, export_codes_csv, sweep_csv
from ..scoring import aggregate_der, compute_der
from ..sessionio import (
    Session,
    SpeakerTimeline,
    read_embeddings,
    read_rttm,
    read_sad,
    write_rttm,
)
from ..synth import SynthConfig, generate
from . import schemas


def pipeline_config(model: schemas.PipelineConfigModel) -> PipelineConfig:
    aa = AaConfig(**model.aa.model_dump())
    data = model.model_dump()
    data["aa"] = aa
    return PipelineConfig(**data)


def _parse_session(embeddings_jsonl: str, sad_text: str) -> Session:
    session = _read_via_temp(embeddings_jsonl, read_embeddings)
    session.sad = _read_via_temp(sad_text, read_sad)
    return session


def _read_via_temp(content: str, reader):
    fd, path = tempfile.mkstemp(suffix=".txt")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(content)
        return reader(path)
    finally:
        os.unlink(path)


def _rttm_text(timelines: list[SpeakerTimeline]) -> str:
    fd, path = tempfile.mkstemp(suffix=".rttm")
    os.close(fd)
    try:
        write_rttm(timelines, path)
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    finally:
        os.unlink(path)


def _report_model(report) -> schemas.DerReportModel:
    return schemas.DerReportModel(**report.to_dict())


def diarise(req: schemas.DiariseRequest) -> schemas.DiariseResponse:
    session = _parse_session(req.embeddings_jsonl, req.sad)
    result = diarise_session(session, pipeline_config(req.config))
    return schemas.DiariseResponse(
        session_id=session.session_id,
        num_speakers=result.num_speakers,
        rttm=_rttm_text([result.timeline]),
    )


def score(req: schemas.ScoreRequest) -> schemas.ScoreResponse:
    refs = {tl.session_id: tl for tl in _read_via_temp(req.ref_rttm, read_rttm)}
    hyps = {tl.session_id: tl for tl in _read_via_temp(req.hyp_rttm, read_rttm)}
    if not refs:
        raise DiarkitError("reference RTTM contains no turns")
    reports = []
    for sid, ref in refs.items():
        hyp = hyps.get(sid, SpeakerTimeline(sid, []))
        reports.append(compute_der(ref, hyp, collar=req.collar))
    overall = aggregate_der(reports)
    return schemas.ScoreResponse(
        reports=[_report_model(r) for r in reports], overall=_report_model(overall)
    )


def synth(req: schemas.SynthRequest) -> schemas.SynthResponse:
    cfg = SynthConfig(**req.config.model_dump())
    session, timeline = generate(cfg)
    from ..sessionio import write_embeddings

    fd, path = tempfile.mkstemp(suffix=".jsonl")
    os.close(fd)
    try:
        write_embeddings(session, path)
        with open(path, "r", encoding="utf-8") as fh:
            emb_text = fh.read()
    finally:
        os.unlink(path)
    sad_text = "".join(f"{s:.3f} {e:.3f}\n" for s, e in session.sad)
    return schemas.SynthResponse(
        session_id=session.session_id,
        embeddings_jsonl=emb_text,
        sad=sad_text,
        rttm=_rttm_text([timeline]),
    )


def sweep(req: schemas.SweepRequest) -> schemas.SweepResponse:
    if (req.synth is None) == (req.sessions is None):
        raise DiarkitError("provide exactly one of 'synth' or 'sessions'")
    pairs: list[tuple[Session, SpeakerTimeline]] = []
    if req.synth is not None:
        corpus = SweepCorpus(**req.synth.model_dump())
        for cfg in corpus.configs():
            pairs.append(generate(cfg))
    else:
        for payload in req.sessions:
            session = _parse_session(payload.embeddings_jsonl, payload.sad)
            timelines = _read_via_temp(payload.ref_rttm, read_rttm)
            ref = next((t for t in timelines if t.session_id == session.session_id), None)
            if ref is None:
                raise DiarkitError(f"no reference turns for session {session.session_id}")
            pairs.append((session, ref))
    base = pipeline_config(req.config)
    text = sweep_csv(pairs, req.dims, req.methods, req.seeds, base=base, jobs=req.jobs)
    return schemas.SweepResponse(csv=text)


def export_codes(req: schemas.ExportCodesRequest) -> schemas.ExportCodesResponse:
    session = _parse_session(req.embeddings_jsonl, req.sad)
    text = export_codes_csv(session, pipeline_config(req.config))
    return schemas.ExportCodesResponse(csv=text)


def health() -> schemas.HealthResponse:
    return schemas.HealthResponse(status="ok", version=__version__)
