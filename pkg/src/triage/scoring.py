"""Scorer clients: the built-in lexicon scorer and the HTTP wire protocol."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Mapping, Protocol, Sequence

import httpx

from .annotations import Theme
from .errors import ScorerProtocolError, ScorerTransportError
from .jsonl import read_records
from .pipeline import Window
from .textmatch import count_phrase


class ScorerClient(Protocol):
    """Scores batches of paragraphs for one theme; results keyed by paragraph id."""

    meta: dict

    def score_batch(self, theme: Theme, paragraphs: Sequence[tuple[str, str]]) -> dict[str, float]:
        ...


def load_lexicon(path: Path | str) -> dict[str, dict[str, float]]:
    """Term-weight file, one record per line: theme_code, term, weight."""
    lexicon: dict[str, dict[str, float]] = {}
    for row in read_records(path):
        theme = Theme.from_code(row["theme_code"])
        lexicon.setdefault(theme.code, {})[row["term"]] = float(row["weight"])
    return lexicon


class LexiconScorer:
    """Deterministic term-count scorer: 1 - exp(-sum(weight * count)).

    Monotone in every term count and bounded in [0, 1); exists so the whole
    pipeline runs with no model dependency. Matching is case-insensitive
    whole-word (multi-word terms allowed).
    """

    def __init__(self, lexicon: Mapping[str, Mapping[str, float]], name: str = "lexicon"):
        self._lexicon = {code: dict(terms) for code, terms in lexicon.items()}
        self.meta = {"name": name, "version": "1"}

    @classmethod
    def from_file(cls, path: Path | str) -> "LexiconScorer":
        return cls(load_lexicon(path), name=f"lexicon:{Path(path).name}")

    def score_text(self, theme: Theme, text: str) -> float:
        terms = self._lexicon.get(theme.code, {})
        total = sum(weight * count_phrase(text, term) for term, weight in terms.items())
        return 1.0 - math.exp(-total)

    def score_batch(self, theme: Theme, paragraphs: Sequence[tuple[str, str]]) -> dict[str, float]:
        return {pid: self.score_text(theme, text) for pid, text in paragraphs}


class HttpScorer:
    """Client for the POST /score wire protocol."""

    def __init__(self, base_url: str, client: httpx.Client | None = None, batch_size: int = 32):
        self.base_url = base_url.rstrip("/")
        self._client = client or httpx.Client(timeout=30.0)
        self.batch_size = batch_size
        self.meta: dict = {"name": "http", "version": "unknown"}

    def score_batch(self, theme: Theme, paragraphs: Sequence[tuple[str, str]]) -> dict[str, float]:
        out: dict[str, float] = {}
        for i in range(0, len(paragraphs), self.batch_size):
            batch = paragraphs[i : i + self.batch_size]
            out.update(self._score_one_batch(theme, batch))
        return out

    def _score_one_batch(self, theme: Theme, batch: Sequence[tuple[str, str]]) -> dict[str, float]:
        ids = tuple(pid for pid, _ in batch)
        body = {
            "theme": theme.code,
            "paragraphs": [{"id": pid, "text": text} for pid, text in batch],
        }
        try:
            response = self._client.post(f"{self.base_url}/score", json=body)
        except httpx.HTTPError as exc:
            raise ScorerTransportError(f"scorer unreachable: {exc}", window_ids=ids) from exc
        if response.status_code < 200 or response.status_code >= 300:
            raise ScorerTransportError(
                f"scorer returned HTTP {response.status_code}", window_ids=ids
            )
        try:
            payload = response.json()
            scores = {entry["id"]: entry["score"] for entry in payload["scores"]}
        except (ValueError, KeyError, TypeError) as exc:
            raise ScorerTransportError(f"malformed scorer response: {exc}", window_ids=ids) from exc
        meta = payload.get("scorer_meta")
        if isinstance(meta, dict):
            self.meta = meta
        return validate_scores(ids, scores)


def validate_scores(expected_ids: Sequence[str], scores: Mapping[str, object]) -> dict[str, float]:
    """Enforce the protocol: one float in [0, 1] per requested paragraph id."""
    out: dict[str, float] = {}
    for pid in expected_ids:
        if pid not in scores:
            raise ScorerProtocolError(f"scorer response missing id {pid!r}")
        value = scores[pid]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ScorerProtocolError(f"score for {pid!r} is not a number: {value!r}")
        value = float(value)
        if not (0.0 <= value <= 1.0):
            raise ScorerProtocolError(f"score for {pid!r} outside [0, 1]: {value}")
        out[pid] = value
    return out


def score_windows(
    windows: Sequence[Window], theme: Theme, scorer: ScorerClient
) -> tuple[dict[int, float], dict]:
    """Score every window; returns start-indexed scores and the scorer's metadata."""
    paragraphs = [(w.window_id, w.text) for w in windows]
    raw = scorer.score_batch(theme, paragraphs)
    scored = validate_scores([pid for pid, _ in paragraphs], raw)
    return {w.start_sentence: scored[w.window_id] for w in windows}, dict(scorer.meta)


def make_scorer(spec: str) -> ScorerClient:
    """Build a scorer from a CLI spec: "lexicon:<file>" or "http:<url>"."""
    if spec.startswith("lexicon:"):
        return LexiconScorer.from_file(spec.split(":", 1)[1])
    if spec.startswith("http:"):
        url = spec.split(":", 1)[1]
        if not url.startswith(("http://", "https://")):
            url = "http://" + url.lstrip("/")
        return HttpScorer(url)
    raise ValueError(f"unknown scorer spec {spec!r} (expected lexicon:<file> or http:<url>)")
