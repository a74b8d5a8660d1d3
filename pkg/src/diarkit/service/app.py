"""FastAPI application wrapping the pipeline operations."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from ..errors import DiarkitError
from . import ops, schemas


def create_app() -> FastAPI:
    app = FastAPI(title="diarkit", description="speaker diarisation back-end")

    def guarded(fn, *args):
        try:
            return fn(*args)
        except DiarkitError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return ops.health()

    @app.post("/diarise", response_model=schemas.DiariseResponse)
    def diarise(req: schemas.DiariseRequest):
        return guarded(ops.diarise, req)

    @app.post("/score", response_model=schemas.ScoreResponse)
    def score(req: schemas.ScoreRequest):
        return guarded(ops.score, req)

    @app.post("/synth", response_model=schemas.SynthResponse)
    def synth(req: schemas.SynthRequest):
        return guarded(ops.synth, req)

    @app.post("/sweep", response_model=schemas.SweepResponse)
    def sweep(req: schemas.SweepRequest):
        return guarded(ops.sweep, req)

    @app.post("/export-codes", response_model=schemas.ExportCodesResponse)
    def export_codes(req: schemas.ExportCodesRequest):
        return guarded(ops.export_codes, req)

    return app


app = create_app()
