"""The primary scorer client against the shared /score conformance fixtures."""

from __future__ import annotations

import json
from pathlib import Path

import httpx
import pytest

from triage.annotations import Theme
from triage.errors import ScorerProtocolError, ScorerTransportError
from triage.scoring import HttpScorer

CASES = json.loads((Path(__file__).parents[1] / "conformance" / "score_cases.json").read_text())


def client_returning(response_body):
    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(200, json=response_body)

    return httpx.Client(transport=httpx.MockTransport(handler), base_url="http://scorer")


@pytest.mark.parametrize("case", CASES["requests"], ids=lambda c: c["name"])
def test_client_sends_fixture_request_bodies(case):
    captured = {}

    def handler(request: httpx.Request) -> httpx.Response:
        captured["body"] = json.loads(request.content)
        scores = [{"id": p["id"], "score": 0.5} for p in captured["body"]["paragraphs"]]
        return httpx.Response(200, json={"scores": scores})

    client = httpx.Client(transport=httpx.MockTransport(handler), base_url="http://scorer")
    scorer = HttpScorer("http://scorer", client=client)
    request = case["request"]
    paragraphs = [(p["id"], p["text"]) for p in request["paragraphs"]]
    scorer.score_batch(Theme.from_code(request["theme"]), paragraphs)
    assert captured["body"] == request


@pytest.mark.parametrize("case", CASES["responses"], ids=lambda c: c["name"])
def test_client_enforces_fixture_responses(case):
    scorer = HttpScorer("http://scorer", client=client_returning(case["response"]))
    paragraphs = [(pid, "text") for pid in case["request_ids"]]
    if case["valid"]:
        scores = scorer.score_batch(Theme.EMOT, paragraphs)
        assert set(scores) == set(case["request_ids"])
        assert all(0.0 <= v <= 1.0 for v in scores.values())
    else:
        with pytest.raises((ScorerProtocolError, ScorerTransportError)):
            scorer.score_batch(Theme.EMOT, paragraphs)
