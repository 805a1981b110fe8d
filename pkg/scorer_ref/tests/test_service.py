from __future__ import annotations

import json
import socket
import threading
import time
from pathlib import Path

import joblib
import pytest
from fastapi.testclient import TestClient
from sklearn.feature_extraction.text import CountVectorizer
from sklearn.linear_model import LogisticRegression
from sklearn.pipeline import Pipeline

from scorer_ref.cli import main
from scorer_ref.config import ConfigError, ScorerConfig
from scorer_ref.model import ModelLoadError, ThemeHead
from scorer_ref.service import create_app

CONFORMANCE = json.loads(
    (Path(__file__).resolve().parents[2] / "conformance" / "score_cases.json").read_text()
)

POSITIVE_TRAIN = [
    "she showed no remorse at all",
    "the defendant laughed without remorse",
    "completely remorseless on the stand",
    "no grief and no remorse shown",
]
NEGATIVE_TRAIN = [
    "the court recessed for lunch",
    "counsel approached the bench",
    "the jurors took their seats",
    "the clerk read the docket",
]


def train_tiny_head(path: Path) -> None:
    pipeline = Pipeline(
        [
            ("vectorize", CountVectorizer()),
            ("classify", LogisticRegression(random_state=0, max_iter=200)),
        ]
    )
    texts = POSITIVE_TRAIN + NEGATIVE_TRAIN
    labels = [1] * len(POSITIVE_TRAIN) + [0] * len(NEGATIVE_TRAIN)
    pipeline.fit(texts, labels)
    joblib.dump(pipeline, path)


@pytest.fixture(scope="module")
def config(tmp_path_factory) -> ScorerConfig:
    model_dir = tmp_path_factory.mktemp("heads")
    head_path = model_dir / "head.joblib"
    train_tiny_head(head_path)
    heads = {code: str(head_path) for code in ("EMOT", "SEX", "NORM", "MOM")}
    return ScorerConfig(model_id="tiny-logreg", heads=heads, batch_size=16)


@pytest.fixture(scope="module")
def client(config) -> TestClient:
    return TestClient(create_app(config))


def test_health_reports_meta(client):
    payload = client.get("/health").json()
    assert payload["status"] == "ok"
    assert payload["scorer_meta"] == {"name": "tiny-logreg", "version": "1"}


def test_two_paragraphs_two_scores_keyed_by_id(client):
    body = {
        "theme": "EMOT",
        "paragraphs": [
            {"id": "p1", "text": "she showed no remorse"},
            {"id": "p2", "text": "the court recessed"},
        ],
    }
    payload = client.post("/score", json=body).json()
    scores = {entry["id"]: entry["score"] for entry in payload["scores"]}
    assert set(scores) == {"p1", "p2"}
    assert all(0.0 <= v <= 1.0 for v in scores.values())
    assert scores["p1"] > scores["p2"]
    assert payload["scorer_meta"]["name"] == "tiny-logreg"


def test_identical_requests_identical_scores(client):
    body = {
        "theme": "NORM",
        "paragraphs": [{"id": f"w:{i}", "text": f"the witness spoke of remorse {i}"} for i in range(5)],
    }
    first = client.post("/score", json=body).json()
    second = client.post("/score", json=body).json()
    assert first == second


def test_oversize_batch_refused_with_max(client, config):
    body = {
        "theme": "EMOT",
        "paragraphs": [{"id": f"w:{i}", "text": "t"} for i in range(config.batch_size + 1)],
    }
    response = client.post("/score", json=body)
    assert response.status_code == 413
    assert response.json()["max_batch_size"] == config.batch_size


def test_unknown_theme_rejected(client):
    response = client.post("/score", json={"theme": "XX", "paragraphs": [{"id": "a", "text": "t"}]})
    assert response.status_code == 422


class OverconfidentHead:
    def predict_proba(self, texts):
        import numpy as np

        return np.array([[-0.0000001, 1.0000001]] * len(texts))


def test_scores_clamped_to_unit_interval(tmp_path):
    head_path = tmp_path / "overconfident.joblib"
    joblib.dump(OverconfidentHead(), head_path)
    config = ScorerConfig(model_id="clampy", heads={"EMOT": str(head_path)})
    client = TestClient(create_app(config))
    payload = client.post(
        "/score", json={"theme": "EMOT", "paragraphs": [{"id": "a", "text": "t"}]}
    ).json()
    assert payload["scores"][0]["score"] == 1.0


def test_missing_head_is_startup_error(tmp_path):
    config = ScorerConfig(model_id="m", heads={"EMOT": str(tmp_path / "absent.joblib")})
    with pytest.raises(ModelLoadError):
        create_app(config)


def test_cli_reports_startup_error(tmp_path, capsys):
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"model_id": "m", "heads": {"EMOT": "absent.joblib"}}))
    assert main(["--config", str(config_path)]) == 1
    assert "startup error" in capsys.readouterr().err


def test_config_validation():
    with pytest.raises(ConfigError):
        ScorerConfig(model_id="m", heads={})
    with pytest.raises(ConfigError):
        ScorerConfig(model_id="m", heads={"EMOT": "x"}, batch_size=0)


def test_config_file_resolves_head_paths(tmp_path):
    head_path = tmp_path / "models" / "emot.joblib"
    head_path.parent.mkdir()
    train_tiny_head(head_path)
    config_path = tmp_path / "scorer.json"
    config_path.write_text(
        json.dumps({"model_id": "demo", "heads": {"EMOT": "models/emot.joblib"}, "batch_size": 8})
    )
    config = ScorerConfig.from_file(config_path)
    assert config.heads["EMOT"] == str(head_path.resolve())
    head = ThemeHead.load(config.heads["EMOT"])
    assert 0.0 <= head.score(["anything"])[0] <= 1.0


@pytest.mark.parametrize("case", CONFORMANCE["requests"], ids=lambda c: c["name"])
def test_conformance_request_fixtures(client, case):
    request = case["request"]
    response = client.post("/score", json=request)
    assert response.status_code == 200
    payload = response.json()
    # structural contract shared with the primary client
    returned_ids = [entry["id"] for entry in payload["scores"]]
    assert returned_ids == [p["id"] for p in request["paragraphs"]]
    for entry in payload["scores"]:
        assert isinstance(entry["score"], (int, float)) and not isinstance(entry["score"], bool)
        assert 0.0 <= float(entry["score"]) <= 1.0
    meta = payload["scorer_meta"]
    assert isinstance(meta["name"], str) and isinstance(meta["version"], str)


def _free_port() -> int:
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        return probe.getsockname()[1]


def test_primary_client_scores_through_live_service(config):
    """The primary package's own wire client consumes this service end to end."""
    import uvicorn

    from triage.annotations import Theme
    from triage.scoring import HttpScorer

    port = _free_port()
    server = uvicorn.Server(
        uvicorn.Config(create_app(config), host="127.0.0.1", port=port, log_level="error")
    )
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    try:
        deadline = time.time() + 10
        import httpx

        while time.time() < deadline:
            try:
                if httpx.get(f"http://127.0.0.1:{port}/health", timeout=0.5).status_code == 200:
                    break
            except httpx.HTTPError:
                time.sleep(0.05)
        else:
            pytest.fail("service did not come up")

        scorer = HttpScorer(f"http://127.0.0.1:{port}", batch_size=2)
        paragraphs = [
            ("w:0", "she showed no remorse"),
            ("w:1", "the court recessed"),
            ("w:2", "no remorse and no grief"),
        ]
        scores = scorer.score_batch(Theme.EMOT, paragraphs)
        assert set(scores) == {"w:0", "w:1", "w:2"}
        assert all(0.0 <= v <= 1.0 for v in scores.values())
        assert scorer.meta == {"name": "tiny-logreg", "version": "1"}
    finally:
        server.should_exit = True
        thread.join(timeout=5)
