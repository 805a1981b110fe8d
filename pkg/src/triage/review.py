"""Disagreement queue construction and the blinded adjudication decision store.

Queue items pair a passage with the side of the disagreement (model-positive
vs annotator-positive); the side stays hidden from reviewers until a decision
is committed. Decisions are written ahead to disk before acknowledgment, and
a decided item can only be superseded, never edited.
"""

from __future__ import annotations

import hashlib
import random
import threading
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Sequence

from .annotations import GoldLabelSet, Theme
from .errors import ConflictError, DecisionValidationError, ItemNotFoundError
from .evaluation import DECISIONS, DECISION_UNDECIDED, SIDE_FN, SIDE_FP, ReviewedDecision
from .jsonl import append_record, read_records, write_records
from .passages import Passage, passage_from_record, passage_to_record, with_peak_scores
from .pipeline import PipelineConfig

QUEUE_SCHEMA_VERSION = 1
DEFAULT_CONTEXT = 5

REASON_CATEGORIES = (
    "unrelated_to_theme",
    "not_about_defendant",
    "neutral_or_factual",
    "needs_longer_context",
    "defense_counterargument",
    "other",
)

STATUS_PENDING = "pending"
STATUS_DECIDED = "decided"


@dataclass(frozen=True)
class DisagreementItem:
    item_id: str
    transcript_id: str
    theme: Theme
    passage: Passage
    side: str  # SIDE_FP | SIDE_FN
    rank_score: float
    context_start: int
    context_end: int
    status: str = STATUS_PENDING


@dataclass(frozen=True)
class AdjudicationRecord:
    record_id: str
    item_id: str
    decision: str
    reason_text: str
    reason_category: str
    secondary_categories: tuple[str, ...]
    reviewers: tuple[str, ...]
    started_at: str
    ended_at: str
    side: str
    theme: str
    client_token: str | None = None
    supersedes: str | None = None

    def to_record(self) -> dict:
        return {
            "record_id": self.record_id,
            "item_id": self.item_id,
            "decision": self.decision,
            "reason_text": self.reason_text,
            "reason_category": self.reason_category,
            "secondary_categories": list(self.secondary_categories),
            "reviewers": list(self.reviewers),
            "started_at": self.started_at,
            "ended_at": self.ended_at,
            "side": self.side,
            "theme": self.theme,
            "client_token": self.client_token,
            "supersedes": self.supersedes,
        }


@dataclass
class ReviewQueue:
    queue_id: str
    theme: Theme
    items: list[DisagreementItem]
    provenance: dict = field(default_factory=dict)

    def item(self, item_id: str) -> DisagreementItem:
        for candidate in self.items:
            if candidate.item_id == item_id:
                return candidate
        raise ItemNotFoundError(f"no item {item_id!r} in queue {self.queue_id!r}")


def _item_id(theme: Theme, transcript_id: str, passage: Passage) -> str:
    key = f"{theme.code}|{transcript_id}|{passage.start_sentence}|{passage.end_sentence}"
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:12]


def fp_candidates(predicted: Sequence[Passage], gold: GoldLabelSet, theme: Theme) -> list[Passage]:
    """Predicted passages with zero gold-positive member sentences."""
    positives = gold.positives(theme)
    return [p for p in predicted if not any(i in positives for i in p.member_indices())]


def fn_candidates(
    gold_passages: Sequence[Passage], sentence_scores: Mapping[int, float], cfg: PipelineConfig
) -> list[Passage]:
    """Gold passages whose every member score stays at or below the grouping threshold."""
    scored = with_peak_scores(gold_passages, sentence_scores)
    return [p for p in scored if p.peak_score <= cfg.group_threshold]


def build_queue(
    predicted: Sequence[Passage],
    gold_passages: Sequence[Passage],
    gold_labels: Mapping[str, GoldLabelSet],
    sentence_scores: Mapping[str, Mapping[int, float]],
    cfg: PipelineConfig,
    theme: Theme,
    fn_count: int | None = None,
    queue_id: str | None = None,
    scorer_meta: Mapping | None = None,
) -> ReviewQueue:
    """Select per-transcript disagreement items and blind their order.

    Per transcript: the fp_queue_size highest-peaked false-positive
    candidates (ties to the lower start index) and the fn_count
    lowest-peaked false-negative candidates, clamped to availability. Items
    are shuffled within each transcript with a seeded RNG so reviewers
    cannot infer the side from position; transcripts follow id order.
    """
    if fn_count is None:
        fn_count = cfg.fn_queue_min
    if not (cfg.fn_queue_min <= fn_count <= cfg.fn_queue_max):
        fn_count = max(cfg.fn_queue_min, min(fn_count, cfg.fn_queue_max))
    transcript_ids = sorted(
        {p.transcript_id for p in predicted} | {p.transcript_id for p in gold_passages}
    )
    items: list[DisagreementItem] = []
    notes: list[str] = []
    for tid in transcript_ids:
        scores = sentence_scores.get(tid, {})
        gold = gold_labels.get(tid, GoldLabelSet(tid))
        fps = fp_candidates([p for p in predicted if p.transcript_id == tid], gold, theme)
        fps.sort(key=lambda p: (-p.peak_score, p.start_sentence))
        fns = fn_candidates([p for p in gold_passages if p.transcript_id == tid], scores, cfg)
        fns.sort(key=lambda p: (p.peak_score, p.start_sentence))
        selected = [(p, SIDE_FP) for p in fps[: cfg.fp_queue_size]] + [
            (p, SIDE_FN) for p in fns[:fn_count]
        ]
        if not selected:
            notes.append(f"{tid}: no disagreement candidates")
            continue
        per_transcript = [
            DisagreementItem(
                item_id=_item_id(theme, tid, p),
                transcript_id=tid,
                theme=theme,
                passage=p,
                side=side,
                rank_score=p.peak_score,
                context_start=max(0, p.start_sentence - DEFAULT_CONTEXT),
                context_end=p.end_sentence + DEFAULT_CONTEXT,
            )
            for p, side in selected
        ]
        rng = random.Random(f"{cfg.rng_seed}:{theme.code}:{tid}")
        rng.shuffle(per_transcript)
        items.extend(per_transcript)
    provenance = {"config": cfg.to_dict(), "scorer_meta": dict(scorer_meta or {}), "notes": notes}
    return ReviewQueue(
        queue_id=queue_id or f"queue-{theme.code}-{cfg.rng_seed}",
        theme=theme,
        items=items,
        provenance=provenance,
    )


def store_queue(queue: ReviewQueue, path: Path | str) -> None:
    header = {
        "schema_version": QUEUE_SCHEMA_VERSION,
        "queue_id": queue.queue_id,
        "theme": queue.theme.code,
        "provenance": queue.provenance,
    }
    rows = [header] + [
        {
            "item_id": item.item_id,
            "transcript_id": item.transcript_id,
            "theme": item.theme.code,
            "passage": passage_to_record(item.passage),
            "side": item.side,
            "rank_score": item.rank_score,
            "context_start": item.context_start,
            "context_end": item.context_end,
            "status": item.status,
        }
        for item in queue.items
    ]
    write_records(path, rows)


def load_queue(path: Path | str) -> ReviewQueue:
    rows = iter(read_records(path))
    header = next(rows)
    items = [
        DisagreementItem(
            item_id=row["item_id"],
            transcript_id=row["transcript_id"],
            theme=Theme.from_code(row["theme"]),
            passage=passage_from_record(row["passage"]),
            side=row["side"],
            rank_score=row["rank_score"],
            context_start=row["context_start"],
            context_end=row["context_end"],
            status=row.get("status", STATUS_PENDING),
        )
        for row in rows
    ]
    return ReviewQueue(
        queue_id=header["queue_id"],
        theme=Theme.from_code(header["theme"]),
        items=items,
        provenance=dict(header.get("provenance", {})),
    )


def utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


class DecisionStore:
    """Append-only adjudication log with per-item compare-and-set semantics.

    Every record is flushed and fsynced before the caller sees it, so a
    service restart never loses a committed decision.
    """

    def __init__(self, path: Path | str):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._by_item: dict[str, AdjudicationRecord] = {}
        if self.path.exists():
            for row in read_records(self.path):
                record = AdjudicationRecord(
                    record_id=row["record_id"],
                    item_id=row["item_id"],
                    decision=row["decision"],
                    reason_text=row["reason_text"],
                    reason_category=row["reason_category"],
                    secondary_categories=tuple(row.get("secondary_categories", ())),
                    reviewers=tuple(row["reviewers"]),
                    started_at=row["started_at"],
                    ended_at=row["ended_at"],
                    side=row["side"],
                    theme=row["theme"],
                    client_token=row.get("client_token"),
                    supersedes=row.get("supersedes"),
                )
                self._by_item[record.item_id] = record

    def record_for(self, item_id: str) -> AdjudicationRecord | None:
        return self._by_item.get(item_id)

    def is_decided(self, item_id: str) -> bool:
        return item_id in self._by_item

    def records(self) -> list[AdjudicationRecord]:
        return list(self._by_item.values())

    def record_decision(
        self,
        item: DisagreementItem,
        decision: str,
        reason_text: str = "",
        reason_category: str = "other",
        secondary_categories: Sequence[str] = (),
        reviewers: Sequence[str] = (),
        client_token: str | None = None,
        started_at: str | None = None,
    ) -> AdjudicationRecord:
        _validate_decision(decision, reason_text, reason_category, secondary_categories, reviewers)
        with self._lock:
            existing = self._by_item.get(item.item_id)
            if existing is not None:
                if client_token is not None and existing.client_token == client_token:
                    return existing  # idempotent replay of the same commit
                raise ConflictError(f"item {item.item_id!r} already decided")
            record = AdjudicationRecord(
                record_id=uuid.uuid4().hex,
                item_id=item.item_id,
                decision=decision,
                reason_text=reason_text,
                reason_category=reason_category,
                secondary_categories=tuple(secondary_categories),
                reviewers=tuple(reviewers),
                started_at=started_at or utcnow(),
                ended_at=utcnow(),
                side=item.side,
                theme=item.theme.code,
                client_token=client_token,
            )
            append_record(self.path, record.to_record(), fsync=True)
            self._by_item[item.item_id] = record
            return record

    def supersede(
        self,
        item: DisagreementItem,
        decision: str,
        reason_text: str = "",
        reason_category: str = "other",
        secondary_categories: Sequence[str] = (),
        reviewers: Sequence[str] = (),
    ) -> AdjudicationRecord:
        """Correct a decided item by appending a superseding record."""
        _validate_decision(decision, reason_text, reason_category, secondary_categories, reviewers)
        with self._lock:
            existing = self._by_item.get(item.item_id)
            if existing is None:
                raise ConflictError(f"item {item.item_id!r} has no decision to supersede")
            record = AdjudicationRecord(
                record_id=uuid.uuid4().hex,
                item_id=item.item_id,
                decision=decision,
                reason_text=reason_text,
                reason_category=reason_category,
                secondary_categories=tuple(secondary_categories),
                reviewers=tuple(reviewers),
                started_at=existing.started_at,
                ended_at=utcnow(),
                side=item.side,
                theme=item.theme.code,
                supersedes=existing.record_id,
            )
            append_record(self.path, record.to_record(), fsync=True)
            self._by_item[item.item_id] = record
            return record

    def reviewed_decisions(self) -> list[ReviewedDecision]:
        return [
            ReviewedDecision(
                theme=Theme.from_code(r.theme),
                side=r.side,
                decision=r.decision,
                started_at=r.started_at,
                ended_at=r.ended_at,
            )
            for r in self._by_item.values()
        ]


def _validate_decision(
    decision: str,
    reason_text: str,
    reason_category: str,
    secondary_categories: Sequence[str],
    reviewers: Sequence[str],
) -> None:
    if decision not in DECISIONS:
        raise DecisionValidationError(f"unknown decision {decision!r}")
    if reason_category not in REASON_CATEGORIES:
        raise DecisionValidationError(f"unknown reason category {reason_category!r}")
    for category in secondary_categories:
        if category not in REASON_CATEGORIES:
            raise DecisionValidationError(f"unknown secondary category {category!r}")
    if decision == DECISION_UNDECIDED and not reason_text.strip():
        raise DecisionValidationError("undecided requires a non-empty reason_text")
    if not reviewers:
        raise DecisionValidationError("at least one reviewer id is required")


def export_decisions(store: DecisionStore) -> list[dict]:
    return [record.to_record() for record in store.records()]


def queue_with_status(queue: ReviewQueue, store: DecisionStore) -> list[DisagreementItem]:
    return [
        replace(item, status=STATUS_DECIDED if store.is_decided(item.item_id) else STATUS_PENDING)
        for item in queue.items
    ]
