import json

import pytest

from diarkit.cli import (
    EXIT_IO,
    EXIT_MISMATCH,
    EXIT_PARSE,
    EXIT_USAGE,
    main,
)


@pytest.fixture()
def synth_dir(tmp_path):
    out = tmp_path / "data"
    rc = main(
        [
            "synth",
            "--out-dir",
            str(out),
            "--n-speakers",
            "2",
            "--duration",
            "45",
            "--noise-drift",
            "0",
            "--seed",
            "42",
            "--session-id",
            "cli",
        ]
    )
    assert rc == 0
    return out


def test_synth_writes_three_files(synth_dir):
    for ext in ("jsonl", "lab", "rttm"):
        assert (synth_dir / f"cli.{ext}").exists()


def test_diarise_score_round_trip(synth_dir, tmp_path, capsys):
    hyp = tmp_path / "hyp.rttm"
    rc = main(
        [
            "diarise",
            "--embeddings", str(synth_dir / "cli.jsonl"),
            "--sad", str(synth_dir / "cli.lab"),
            "--out", str(hyp),
            "--method", "raw",
            "--no-aa",
            "--seed", "7",
        ]
    )
    assert rc == 0
    assert hyp.exists()
    rc = main(
        ["score", "--ref", str(synth_dir / "cli.rttm"), "--hyp", str(hyp), "--json"]
    )
    assert rc == 0
    out = capsys.readouterr().out
    payload = json.loads(out[out.index("[") :])
    assert payload[0]["der"] == pytest.approx(0.0, abs=1e-9)


def test_diarise_deterministic_bytes(synth_dir, tmp_path):
    outs = []
    for name in ("a.rttm", "b.rttm"):
        path = tmp_path / name
        rc = main(
            [
                "diarise",
                "--embeddings", str(synth_dir / "cli.jsonl"),
                "--sad", str(synth_dir / "cli.lab"),
                "--out", str(path),
                "--method", "ddri",
                "--epochs", "5",
                "--lr", "0.02",
                "--seed", "11",
            ]
        )
        assert rc == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_missing_sad_file_names_path(synth_dir, tmp_path, capsys):
    rc = main(
        [
            "diarise",
            "--embeddings", str(synth_dir / "cli.jsonl"),
            "--sad", str(tmp_path / "missing.lab"),
            "--out", str(tmp_path / "x.rttm"),
        ]
    )
    assert rc == EXIT_IO
    assert "missing.lab" in capsys.readouterr().err


def test_bad_embeddings_parse_error(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("garbage\n")
    sad = tmp_path / "s.lab"
    sad.write_text("0 1\n")
    rc = main(
        [
            "diarise",
            "--embeddings", str(bad),
            "--sad", str(sad),
            "--out", str(tmp_path / "x.rttm"),
        ]
    )
    assert rc == EXIT_PARSE


def test_score_session_mismatch_exit_code(tmp_path):
    ref = tmp_path / "r.rttm"
    hyp = tmp_path / "h.rttm"
    ref.write_text("SPEAKER a 1 0.0 1.0 <NA> <NA> x <NA> <NA>\n")
    hyp.write_text("SPEAKER b 1 0.0 1.0 <NA> <NA> x <NA> <NA>\n")
    # hypothesis for unknown session scores as empty; mismatch only arises
    # through compute_der on differing ids, so this should succeed
    assert main(["score", "--ref", str(ref), "--hyp", str(hyp)]) == 0


def test_sweep_csv_deterministic(synth_dir, tmp_path):
    outs = []
    for name in ("s1.csv", "s2.csv"):
        path = tmp_path / name
        rc = main(
            [
                "sweep",
                "--out", str(path),
                "--dims", "8,16",
                "--methods", "raw,dr",
                "--seeds", "0",
                "--synth-sessions", "2",
                "--synth-min-speakers", "2",
                "--synth-max-speakers", "3",
                "--duration", "30",
                "--epochs", "3",
                "--lr", "0.02",
                "--no-aa",
                "--synth-seed", "5",
            ]
        )
        assert rc == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    lines = outs[0].decode().strip().split("\n")
    assert lines[0] == "method,dim,seed,session,SC,DER"
    assert len(lines) - 1 == 2 * 2 * 2


def test_sweep_dataset_dir(synth_dir, tmp_path):
    out = tmp_path / "ds.csv"
    rc = main(
        [
            "sweep",
            "--out", str(out),
            "--dims", "8",
            "--methods", "raw",
            "--seeds", "0",
            "--dataset-dir", str(synth_dir),
            "--no-aa",
        ]
    )
    assert rc == 0
    lines = out.read_text().strip().split("\n")
    assert len(lines) - 1 == 1
    assert "cli" in lines[1]


def test_export_codes_columns(synth_dir, tmp_path):
    out = tmp_path / "codes.csv"
    rc = main(
        [
            "export-codes",
            "--embeddings", str(synth_dir / "cli.jsonl"),
            "--sad", str(synth_dir / "cli.lab"),
            "--out", str(out),
            "--method", "ddri",
            "--speaker-dim", "4",
            "--noise-dim", "2",
            "--epochs", "2",
            "--seed", "3",
        ]
    )
    assert rc == 0
    assert out.read_text().split("\n", 1)[0] == "start,speech,s0,s1,s2,s3,n0,n1"


def test_dump_config_merges_file_and_flags(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"speaker_dim": 12, "epochs": 7, "aa": {"enabled": False}}))
    rc = main(
        [
            "diarise",
            "--embeddings", "unused",
            "--sad", "unused",
            "--out", "unused",
            "--config", str(cfg),
            "--speaker-dim", "20",
            "--dump-config",
        ]
    )
    assert rc == 0
    dumped = json.loads(capsys.readouterr().out)
    assert dumped["speaker_dim"] == 20  # flag beats file
    assert dumped["epochs"] == 7  # file beats default
    assert dumped["aa"]["enabled"] is False
    assert dumped["method"] == "ddri"  # default


def test_invalid_method_rejected(synth_dir, tmp_path, capsys):
    rc = main(
        [
            "diarise",
            "--embeddings", str(synth_dir / "cli.jsonl"),
            "--sad", str(synth_dir / "cli.lab"),
            "--out", str(tmp_path / "x.rttm"),
            "--no-noise-code",
            "--method", "dr",
        ]
    )
    assert rc == EXIT_USAGE


def test_ablation_flags(synth_dir, tmp_path):
    for flag in ("--no-indicator", "--no-noise-code"):
        rc = main(
            [
                "diarise",
                "--embeddings", str(synth_dir / "cli.jsonl"),
                "--sad", str(synth_dir / "cli.lab"),
                "--out", str(tmp_path / "abl.rttm"),
                "--method", "ddri",
                "--epochs", "3",
                "--lr", "0.02",
                flag,
                "--seed", "1",
            ]
        )
        assert rc == 0
