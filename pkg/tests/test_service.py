import pytest
from fastapi.testclient import TestClient

from diarkit.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


@pytest.fixture(scope="module")
def synth_payload(client):
    resp = client.post(
        "/synth",
        json={
            "config": {
                "n_speakers": 2,
                "duration": 45.0,
                "noise_drift": 0.0,
                "seed": 42,
                "session_id": "svc",
            }
        },
    )
    assert resp.status_code == 200
    return resp.json()


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    body = resp.json()
    assert body["status"] == "ok" and body["version"]


def test_synth_outputs_parse(synth_payload):
    assert synth_payload["session_id"] == "svc"
    header = synth_payload["embeddings_jsonl"].split("\n", 1)[0]
    assert '"session_id": "svc"' in header
    assert synth_payload["rttm"].startswith("SPEAKER svc")
    assert synth_payload["sad"].strip()


def test_diarise_then_score_round_trip(client, synth_payload):
    resp = client.post(
        "/diarise",
        json={
            "embeddings_jsonl": synth_payload["embeddings_jsonl"],
            "sad": synth_payload["sad"],
            "config": {"method": "raw", "seed": 7, "aa": {"enabled": False}},
        },
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["num_speakers"] == 2

    score = client.post(
        "/score",
        json={"ref_rttm": synth_payload["rttm"], "hyp_rttm": body["rttm"], "collar": 0.0},
    )
    assert score.status_code == 200
    overall = score.json()["overall"]
    assert overall["der"] == pytest.approx(0.0, abs=1e-6)
    assert overall["fa"] == 0.0


def test_score_hand_example(client):
    ref = (
        "SPEAKER s 1 0.000 6.000 <NA> <NA> spk1 <NA> <NA>\n"
        "SPEAKER s 1 6.000 4.000 <NA> <NA> spk2 <NA> <NA>\n"
    )
    hyp = (
        "SPEAKER s 1 0.000 5.000 <NA> <NA> A <NA> <NA>\n"
        "SPEAKER s 1 5.000 5.000 <NA> <NA> B <NA> <NA>\n"
    )
    resp = client.post("/score", json={"ref_rttm": ref, "hyp_rttm": hyp, "collar": 0.0})
    assert resp.status_code == 200
    rep = resp.json()["reports"][0]
    assert rep["der"] == pytest.approx(0.10)
    assert rep["sc"] == pytest.approx(1.0)
    assert dict(rep["mapping"]) == {"spk1": "A", "spk2": "B"}


def test_sweep_synth_corpus(client):
    resp = client.post(
        "/sweep",
        json={
            "dims": [8],
            "methods": ["raw", "dr"],
            "seeds": [0],
            "synth": {
                "sessions": 2,
                "min_speakers": 2,
                "max_speakers": 2,
                "duration": 30.0,
                "seed": 3,
            },
            "config": {"epochs": 3, "learning_rate": 0.02, "aa": {"enabled": False}},
        },
    )
    assert resp.status_code == 200
    lines = resp.json()["csv"].strip().split("\n")
    assert lines[0] == "method,dim,seed,session,SC,DER"
    assert len(lines) - 1 == 4


def test_sweep_requires_one_source(client):
    resp = client.post("/sweep", json={"dims": [8], "methods": ["raw"], "seeds": [0]})
    assert resp.status_code == 422


def test_export_codes(client, synth_payload):
    resp = client.post(
        "/export-codes",
        json={
            "embeddings_jsonl": synth_payload["embeddings_jsonl"],
            "sad": synth_payload["sad"],
            "config": {
                "method": "ddri",
                "speaker_dim": 4,
                "noise_dim": 2,
                "epochs": 2,
                "seed": 1,
            },
        },
    )
    assert resp.status_code == 200
    header = resp.json()["csv"].split("\n", 1)[0]
    assert header == "start,speech,s0,s1,s2,s3,n0,n1"


def test_export_codes_rejects_raw(client, synth_payload):
    resp = client.post(
        "/export-codes",
        json={
            "embeddings_jsonl": synth_payload["embeddings_jsonl"],
            "sad": synth_payload["sad"],
            "config": {"method": "raw"},
        },
    )
    assert resp.status_code == 422


def test_diarise_rejects_garbage(client):
    resp = client.post(
        "/diarise", json={"embeddings_jsonl": "not json", "sad": "", "config": {}}
    )
    assert resp.status_code == 422


def test_diarise_rejects_bad_method(client, synth_payload):
    resp = client.post(
        "/diarise",
        json={
            "embeddings_jsonl": synth_payload["embeddings_jsonl"],
            "sad": synth_payload["sad"],
            "config": {"method": "nope"},
        },
    )
    assert resp.status_code == 422
