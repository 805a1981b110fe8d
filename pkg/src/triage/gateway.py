"""HTTP service exposing the review workflow; blinding is enforced here.

Pre-commit responses are built from an explicit whitelist of fields, so no
queue listing or item detail can leak the disagreement side, the annotator
label, or any model score before a decision is committed.
"""

from __future__ import annotations

import json
import socket
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .annotations import GoldLabelSet, Theme
from .corpus import Transcript, load_corpus
from .errors import (
    ConflictError,
    DecisionValidationError,
    ItemNotFoundError,
    StartupError,
    StateCorruptionError,
    TriageError,
)
from .evaluation import SIDE_FP, agreement_report, build_metric_report
from .pipeline import PipelineConfig
from .review import (
    DecisionStore,
    DisagreementItem,
    ReviewQueue,
    STATUS_DECIDED,
    STATUS_PENDING,
    load_queue,
    utcnow,
)

DECISIONS_FILENAME = "decisions.jsonl"
SESSION_FILENAME = "session.json"
DEFAULT_VIEW_CONTEXT = 5


@dataclass
class MetricsContext:
    """Optional evaluation inputs so the service can answer /reports/metrics."""

    predicted: dict  # (transcript_id, theme) -> list[Passage]
    sentence_scores: dict  # (transcript_id, theme) -> {index: score}
    gold_labels: Mapping[str, GoldLabelSet]
    cfg: PipelineConfig


@dataclass
class SessionState:
    """Resumable pointer into the active queue."""

    active_queue_id: str | None = None
    cursor_item_id: str | None = None
    reviewer_ids: list = field(default_factory=list)
    config_snapshot: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "active_queue_id": self.active_queue_id,
            "cursor_item_id": self.cursor_item_id,
            "reviewer_ids": self.reviewer_ids,
            "config_snapshot": self.config_snapshot,
        }


class ReviewGateway:
    """Bundles corpus, queues, and the decision store behind the API."""

    def __init__(
        self,
        corpus: Mapping[str, Transcript],
        queues: Mapping[str, ReviewQueue],
        store: DecisionStore,
        metrics: MetricsContext | None = None,
        state_dir: Path | None = None,
    ):
        self.corpus = dict(corpus)
        self.queues = dict(queues)
        self.store = store
        self.metrics = metrics
        self.state_dir = state_dir
        self.session = SessionState()
        self._first_served: dict[str, str] = {}
        self._serve_lock = threading.Lock()

    def find_item(self, item_id: str) -> tuple[ReviewQueue, DisagreementItem]:
        for queue in self.queues.values():
            for item in queue.items:
                if item.item_id == item_id:
                    return queue, item
        raise ItemNotFoundError(f"no item {item_id!r}")

    def status_of(self, item: DisagreementItem) -> str:
        return STATUS_DECIDED if self.store.is_decided(item.item_id) else STATUS_PENDING

    def next_pending(self, queue: ReviewQueue) -> DisagreementItem | None:
        for item in queue.items:
            if not self.store.is_decided(item.item_id):
                return item
        return None

    def mark_served(self, item: DisagreementItem) -> None:
        with self._serve_lock:
            self._first_served.setdefault(item.item_id, utcnow())

    def started_at(self, item_id: str) -> str | None:
        return self._first_served.get(item_id)

    def transcript_for(self, item: DisagreementItem) -> Transcript:
        transcript = self.corpus.get(item.transcript_id)
        if transcript is None:
            raise ItemNotFoundError(f"transcript {item.transcript_id!r} not loaded")
        return transcript

    def context_bounds(self, item: DisagreementItem, extra: int) -> tuple[int, int]:
        transcript = self.transcript_for(item)
        lo = max(0, item.passage.start_sentence - extra)
        hi = min(len(transcript) - 1, item.passage.end_sentence + extra)
        return lo, hi

    def save_session(self) -> None:
        if self.state_dir is None:
            return
        path = self.state_dir / SESSION_FILENAME
        path.write_text(json.dumps(self.session.to_dict(), sort_keys=True), encoding="utf-8")


def blinded_item_view(gw: ReviewGateway, queue: ReviewQueue, item: DisagreementItem, context: int) -> dict:
    """Whitelisted pre-commit payload: passage text and context, nothing else."""
    transcript = gw.transcript_for(item)
    texts = transcript.sentence_texts()
    p = item.passage
    lo, hi = gw.context_bounds(item, context)
    return {
        "item_id": item.item_id,
        "queue_id": queue.queue_id,
        "theme": item.theme.code,
        "transcript_id": item.transcript_id,
        "status": gw.status_of(item),
        "passage": {
            "start": p.start_sentence,
            "end": p.end_sentence,
            "sentences": texts[p.start_sentence : p.end_sentence + 1],
        },
        "context": {
            "start": lo,
            "end": hi,
            "before": texts[lo : p.start_sentence],
            "after": texts[p.end_sentence + 1 : hi + 1],
        },
    }


def reveal_for(item: DisagreementItem) -> dict:
    if item.side == SIDE_FP:
        return {"side": SIDE_FP, "model_label": "positive", "annotator_label": "negative"}
    return {"side": item.side, "model_label": "negative", "annotator_label": "positive"}


class DecisionBody(BaseModel):
    decision: str
    reason_category: str = "other"
    reason_text: str = ""
    secondary_categories: list = []
    reviewers: list = []
    client_token: str | None = None


def create_app(gw: ReviewGateway, ui_dir: Path | str | None = None) -> FastAPI:
    app = FastAPI(title="triage review gateway")
    app.state.gateway = gw

    @app.exception_handler(TriageError)
    async def _triage_error(request: Request, exc: TriageError):
        status = 500
        if isinstance(exc, ItemNotFoundError):
            status = 404
        elif isinstance(exc, ConflictError):
            status = 409
        elif isinstance(exc, DecisionValidationError):
            status = 422
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    @app.get("/queues")
    def list_queues() -> list:
        out = []
        for queue in gw.queues.values():
            decided = sum(1 for item in queue.items if gw.store.is_decided(item.item_id))
            out.append(
                {
                    "queue_id": queue.queue_id,
                    "theme": queue.theme.code,
                    "pending_count": len(queue.items) - decided,
                    "decided_count": decided,
                }
            )
        return out

    @app.get("/queues/{queue_id}/next")
    def next_item(queue_id: str, context: int = Query(default=-1)):
        queue = gw.queues.get(queue_id)
        if queue is None:
            raise ItemNotFoundError(f"no queue {queue_id!r}")
        item = gw.next_pending(queue)
        if item is None:
            raise HTTPException(status_code=404, detail="queue has no pending items")
        gw.mark_served(item)
        gw.session.active_queue_id = queue.queue_id
        gw.session.cursor_item_id = item.item_id
        gw.save_session()
        extra = context if context >= 0 else DEFAULT_VIEW_CONTEXT
        return blinded_item_view(gw, queue, item, extra)

    @app.get("/items/{item_id}")
    def get_item(item_id: str, context: int = Query(default=-1)):
        queue, item = gw.find_item(item_id)
        if not gw.store.is_decided(item.item_id):
            gw.mark_served(item)
        extra = context if context >= 0 else DEFAULT_VIEW_CONTEXT
        return blinded_item_view(gw, queue, item, extra)

    @app.get("/items/{item_id}/context")
    def expand_context(item_id: str, extra: int = Query(default=DEFAULT_VIEW_CONTEXT, ge=0)):
        queue, item = gw.find_item(item_id)
        transcript = gw.transcript_for(item)
        texts = transcript.sentence_texts()
        lo, hi = gw.context_bounds(item, extra)
        p = item.passage
        return {
            "item_id": item.item_id,
            "context": {
                "start": lo,
                "end": hi,
                "before": texts[lo : p.start_sentence],
                "after": texts[p.end_sentence + 1 : hi + 1],
            },
        }

    @app.post("/items/{item_id}/decision")
    def decide(item_id: str, body: DecisionBody):
        queue, item = gw.find_item(item_id)
        record = gw.store.record_decision(
            item,
            decision=body.decision,
            reason_text=body.reason_text,
            reason_category=body.reason_category,
            secondary_categories=tuple(body.secondary_categories),
            reviewers=tuple(body.reviewers),
            client_token=body.client_token,
            started_at=gw.started_at(item_id),
        )
        gw.session.cursor_item_id = item.item_id
        gw.save_session()
        return {"record": record.to_record(), "reveal": reveal_for(item)}

    @app.get("/reports/agreement")
    def report_agreement(theme: str | None = None):
        themes = [Theme.from_code(theme)] if theme else list(Theme)
        decisions = gw.store.reviewed_decisions()
        return [agreement_report(decisions, t).to_record() for t in themes]

    @app.get("/reports/metrics")
    def report_metrics():
        if gw.metrics is None:
            raise HTTPException(status_code=404, detail="no evaluation inputs configured")
        ctx = gw.metrics
        reports = []
        for (tid, theme), predicted in sorted(ctx.predicted.items(), key=lambda kv: (kv[0][0], kv[0][1].code)):
            gold = ctx.gold_labels.get(tid)
            if gold is None:
                continue
            scores = ctx.sentence_scores.get((tid, theme), {})
            reports.append(build_metric_report(tid, theme, predicted, scores, gold, ctx.cfg).to_record())
        return reports

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def load_state(corpus_dir: Path | str, state_dir: Path | str) -> tuple[dict, dict, DecisionStore]:
    """Load corpus, queues, and decisions; corrupted state refuses to start."""
    state_dir = Path(state_dir)
    corpus = load_corpus(corpus_dir)
    queues = {}
    try:
        for path in sorted(state_dir.glob("queue*.jsonl")):
            queue = load_queue(path)
            queues[queue.queue_id] = queue
        store = DecisionStore(state_dir / DECISIONS_FILENAME)
    except (StateCorruptionError, KeyError, json.JSONDecodeError) as exc:
        raise StartupError(f"corrupted state in {state_dir}: {exc}") from exc
    return corpus, queues, store


def check_port_free(host: str, port: int) -> None:
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as probe:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            probe.bind((host, port))
        except OSError as exc:
            raise StartupError(f"cannot bind {host}:{port}: {exc}") from exc


def serve(
    corpus_dir: Path | str,
    state_dir: Path | str,
    port: int = 8765,
    host: str = "127.0.0.1",
    metrics: MetricsContext | None = None,
    ui_dir: Path | str | None = None,
) -> None:
    import uvicorn

    corpus, queues, store = load_state(corpus_dir, state_dir)
    gw = ReviewGateway(corpus, queues, store, metrics=metrics, state_dir=Path(state_dir))
    app = create_app(gw, ui_dir=ui_dir)
    check_port_free(host, port)
    uvicorn.run(app, host=host, port=port, log_level="warning")
