"""Command-line front-end.

The CLI is a thin client over the service operations: it reads local
files, builds the request models, runs the operation (in-process by
default, or against a running server via ``--server``), and writes the
responses back to disk.  All randomness flows from the ``--seed`` flag.

Config precedence: explicit CLI flags > ``--config`` JSON file > defaults.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import (
    DiarkitError,
    DimMismatchError,
    EmptyError,
    InvalidConfigError,
    IoError,
    KTooLargeError,
    LengthMismatchError,
    NegativeCollarError,
    NonFiniteError,
    NonSquareError,
    NotSymmetricError,
    ParseError,
    SessionMismatchError,
    TooFewRecordsError,
    ZeroVectorError,
)
from .service import ops, schemas
from .sessionio import atomic_write

EXIT_USAGE = 1
EXIT_IO = 2
EXIT_PARSE = 3
EXIT_MISMATCH = 4
EXIT_NUMERIC = 5
EXIT_SERVER = 6
EXIT_INTERNAL = 7

_PIPELINE_KEYS = (
    "method",
    "speaker_dim",
    "noise_dim",
    "dropout_rate",
    "indicator_scale",
    "epochs",
    "batch_size",
    "learning_rate",
    "optimizer",
    "no_indicator",
    "no_noise_code",
    "eigen_threshold",
    "max_speakers",
    "seed",
)


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=["raw", "dr", "ddri"], default=None)
    p.add_argument("--speaker-dim", type=int, default=None, dest="speaker_dim")
    p.add_argument("--noise-dim", type=int, default=None, dest="noise_dim")
    p.add_argument("--dropout", type=float, default=None, dest="dropout_rate")
    p.add_argument("--no-indicator", action="store_const", const=True, default=None, dest="no_indicator")
    p.add_argument("--no-noise-code", action="store_const", const=True, default=None, dest="no_noise_code")
    p.add_argument("--indicator-scale", type=float, default=None, dest="indicator_scale")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None, dest="batch_size")
    p.add_argument("--lr", type=float, default=None, dest="learning_rate")
    p.add_argument("--optimizer", choices=["gd", "adam"], default=None)
    p.add_argument("--aa", action=argparse.BooleanOptionalAction, default=None, dest="aa_enabled")
    p.add_argument("--eigen-threshold", type=float, default=None, dest="eigen_threshold")
    p.add_argument("--max-speakers", type=int, default=None, dest="max_speakers")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None, help="JSON file with defaults for these flags")
    p.add_argument("--dump-config", action="store_true", help="print the effective config and exit")


def _pipeline_model(args: argparse.Namespace) -> schemas.PipelineConfigModel:
    file_cfg = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except OSError as exc:
            raise IoError(f"cannot read config file {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad config file {args.config}: {exc}") from exc
    merged: dict = {}
    for key in _PIPELINE_KEYS:
        cli_val = getattr(args, key, None)
        if cli_val is not None:
            merged[key] = cli_val
        elif key in file_cfg:
            merged[key] = file_cfg[key]
    aa = dict(file_cfg.get("aa", {}))
    if getattr(args, "aa_enabled", None) is not None:
        aa["enabled"] = args.aa_enabled
    if aa:
        merged["aa"] = aa
    return schemas.PipelineConfigModel(**merged)


def _read_text(path: str, what: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {what} file {path}: {exc}") from exc


class _Client:
    """Runs operations locally or forwards them to a server."""

    def __init__(self, server: str | None):
        self.server = server.rstrip("/") if server else None

    def call(self, path: str, request, response_cls):
        op = {
            "/diarise": ops.diarise,
            "/score": ops.score,
            "/synth": ops.synth,
            "/sweep": ops.sweep,
            "/export-codes": ops.export_codes,
        }[path]
        if self.server is None:
            return op(request)
        import httpx

        resp = httpx.post(
            f"{self.server}{path}", json=request.model_dump(), timeout=None
        )
        if resp.status_code != 200:
            raise DiarkitError(f"server error {resp.status_code}: {resp.text}")
        return response_cls.model_validate(resp.json())


def cmd_diarise(args) -> int:
    config = _pipeline_model(args)
    if args.dump_config:
        print(config.model_dump_json(indent=2))
        return 0
    req = schemas.DiariseRequest(
        embeddings_jsonl=_read_text(args.embeddings, "embeddings"),
        sad=_read_text(args.sad, "SAD"),
        config=config,
    )
    resp = _Client(args.server).call("/diarise", req, schemas.DiariseResponse)
    atomic_write(args.out, resp.rttm)
    print(f"{resp.session_id}: {resp.num_speakers} speakers -> {args.out}")
    return 0


def cmd_score(args) -> int:
    req = schemas.ScoreRequest(
        ref_rttm=_read_text(args.ref, "reference RTTM"),
        hyp_rttm=_read_text(args.hyp, "hypothesis RTTM"),
        collar=args.collar,
    )
    resp = _Client(args.server).call("/score", req, schemas.ScoreResponse)
    if args.json:
        print(json.dumps([r.model_dump() for r in resp.reports] + [resp.overall.model_dump()], indent=2))
    else:
        for r in resp.reports:
            print(f"-- {r.session_id}")
            print(_table(r))
        if len(resp.reports) > 1:
            print("-- overall")
            print(_table(resp.overall))
    return 0


def _table(r: schemas.DerReportModel) -> str:
    lines = [
        f"scored speech      {r.total_scored:10.3f}s",
        f"false alarm        {r.fa:10.3f}s  {r.fa_rate:8.2%}",
        f"missed speech      {r.ms:10.3f}s  {r.ms_rate:8.2%}",
        f"speaker confusion  {r.sc:10.3f}s  {r.sc_rate:8.2%}",
        f"DER                            {r.der:8.2%}",
    ]
    if r.mapping:
        lines.append("mapping: " + ", ".join(f"{a}->{b}" for a, b in r.mapping))
    return "\n".join(lines)


def cmd_synth(args) -> int:
    req = schemas.SynthRequest(
        config=schemas.SynthConfigModel(
            n_speakers=args.n_speakers,
            duration=args.duration,
            dim=args.dim,
            speaker_spread=args.speaker_spread,
            noise_dims=args.noise_dims,
            noise_drift=args.noise_drift,
            noise_damping=args.noise_damping,
            nonspeech_fraction=args.nonspeech_fraction,
            turn_mean=args.turn_mean,
            seed=args.seed,
            session_id=args.session_id,
        )
    )
    resp = _Client(args.server).call("/synth", req, schemas.SynthResponse)
    os.makedirs(args.out_dir, exist_ok=True)
    base = os.path.join(args.out_dir, resp.session_id)
    atomic_write(f"{base}.jsonl", resp.embeddings_jsonl)
    atomic_write(f"{base}.lab", resp.sad)
    atomic_write(f"{base}.rttm", resp.rttm)
    print(f"wrote {base}.jsonl / .lab / .rttm")
    return 0


def _parse_list(text: str, conv):
    return [conv(tok) for tok in text.split(",") if tok]


def cmd_sweep(args) -> int:
    config = _pipeline_model(args)
    if args.dump_config:
        print(config.model_dump_json(indent=2))
        return 0
    dims = _parse_list(args.dims, int)
    methods = _parse_list(args.methods, str)
    seeds = _parse_list(args.seeds, int)
    if args.dataset_dir:
        sessions = []
        stems = sorted(
            f[:-6] for f in os.listdir(args.dataset_dir) if f.endswith(".jsonl")
        )
        if not stems:
            raise IoError(f"no .jsonl sessions under {args.dataset_dir}")
        for stem in stems:
            base = os.path.join(args.dataset_dir, stem)
            sessions.append(
                schemas.SweepSessionPayload(
                    embeddings_jsonl=_read_text(f"{base}.jsonl", "embeddings"),
                    sad=_read_text(f"{base}.lab", "SAD"),
                    ref_rttm=_read_text(f"{base}.rttm", "reference RTTM"),
                )
            )
        req = schemas.SweepRequest(
            dims=dims, methods=methods, seeds=seeds, sessions=sessions,
            config=config, jobs=args.jobs,
        )
    else:
        corpus = schemas.SweepCorpusModel(
            sessions=args.synth_sessions,
            min_speakers=args.synth_min_speakers,
            max_speakers=args.synth_max_speakers,
            duration=args.duration,
            dim=args.dim,
            speaker_spread=args.speaker_spread,
            noise_dims=args.noise_dims,
            noise_drift=args.noise_drift,
            noise_damping=args.noise_damping,
            nonspeech_fraction=args.nonspeech_fraction,
            turn_mean=args.turn_mean,
            seed=args.synth_seed,
        )
        req = schemas.SweepRequest(
            dims=dims, methods=methods, seeds=seeds, synth=corpus,
            config=config, jobs=args.jobs,
        )
    resp = _Client(args.server).call("/sweep", req, schemas.SweepResponse)
    atomic_write(args.out, resp.csv)
    print(f"wrote {args.out} ({resp.csv.count(chr(10)) - 1} rows)")
    return 0


def cmd_export_codes(args) -> int:
    config = _pipeline_model(args)
    if args.dump_config:
        print(config.model_dump_json(indent=2))
        return 0
    req = schemas.ExportCodesRequest(
        embeddings_jsonl=_read_text(args.embeddings, "embeddings"),
        sad=_read_text(args.sad, "SAD"),
        config=config,
    )
    resp = _Client(args.server).call("/export-codes", req, schemas.ExportCodesResponse)
    atomic_write(args.out, resp.csv)
    print(f"wrote {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="diarkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("diarise", help="cluster a session's embeddings into speaker turns")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--sad", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--server", default=None)
    _add_pipeline_flags(p)
    p.set_defaults(fn=cmd_diarise)

    p = sub.add_parser("score", help="DER between reference and hypothesis RTTM")
    p.add_argument("--ref", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--collar", type=float, default=0.0)
    p.add_argument("--json", action="store_true")
    p.add_argument("--server", default=None)
    p.set_defaults(fn=cmd_score)

    p = sub.add_parser("synth", help="generate a synthetic session")
    p.add_argument("--out-dir", required=True, dest="out_dir")
    p.add_argument("--n-speakers", type=int, default=2, dest="n_speakers")
    p.add_argument("--duration", type=float, default=60.0)
    p.add_argument("--dim", type=int, default=256)
    p.add_argument("--speaker-spread", type=float, default=0.05, dest="speaker_spread")
    p.add_argument("--noise-dims", type=int, default=8, dest="noise_dims")
    p.add_argument("--noise-drift", type=float, default=0.1, dest="noise_drift")
    p.add_argument("--noise-damping", type=float, default=0.96, dest="noise_damping")
    p.add_argument("--nonspeech-fraction", type=float, default=0.2, dest="nonspeech_fraction")
    p.add_argument("--turn-mean", type=float, default=3.0, dest="turn_mean")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--session-id", default="synth", dest="session_id")
    p.add_argument("--server", default=None)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("sweep", help="grid of (method, dim, seed) pipeline runs")
    p.add_argument("--out", required=True)
    p.add_argument("--dims", required=True, help="comma-separated speaker-code dims")
    p.add_argument("--methods", required=True, help="comma-separated subset of raw,dr,ddri")
    p.add_argument("--seeds", default="0", help="comma-separated pipeline seeds")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--dataset-dir", default=None, dest="dataset_dir")
    p.add_argument("--synth-sessions", type=int, default=20, dest="synth_sessions")
    p.add_argument("--synth-min-speakers", type=int, default=3, dest="synth_min_speakers")
    p.add_argument("--synth-max-speakers", type=int, default=9, dest="synth_max_speakers")
    p.add_argument("--synth-seed", type=int, default=0, dest="synth_seed")
    p.add_argument("--duration", type=float, default=90.0)
    p.add_argument("--dim", type=int, default=256)
    p.add_argument("--speaker-spread", type=float, default=0.05, dest="speaker_spread")
    p.add_argument("--noise-dims", type=int, default=8, dest="noise_dims")
    p.add_argument("--noise-drift", type=float, default=0.1, dest="noise_drift")
    p.add_argument("--noise-damping", type=float, default=0.96, dest="noise_damping")
    p.add_argument("--nonspeech-fraction", type=float, default=0.2, dest="nonspeech_fraction")
    p.add_argument("--turn-mean", type=float, default=3.0, dest="turn_mean")
    p.add_argument("--server", default=None)
    _add_pipeline_flags(p)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("export-codes", help="dump per-record speaker/noise codes as CSV")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--sad", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--server", default=None)
    _add_pipeline_flags(p)
    p.set_defaults(fn=cmd_export_codes)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(fn=cmd_serve)

    return parser


_EXIT_CODES = [
    ((IoError, FileNotFoundError), EXIT_IO),
    ((ParseError,), EXIT_PARSE),
    ((DimMismatchError, LengthMismatchError, SessionMismatchError), EXIT_MISMATCH),
    (
        (
            NonFiniteError,
            TooFewRecordsError,
            KTooLargeError,
            ZeroVectorError,
            NotSymmetricError,
            NonSquareError,
        ),
        EXIT_NUMERIC,
    ),
    ((InvalidConfigError, NegativeCollarError, EmptyError, ValueError), EXIT_USAGE),
]


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except Exception as exc:  # map to stable exit codes
        for types, code in _EXIT_CODES:
            if isinstance(exc, types):
                print(f"error: {exc}", file=sys.stderr)
                return code
        if isinstance(exc, DiarkitError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_SERVER
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
