"""Passage precision, sentence recall, and adjudication agreement arithmetic.

Empty-denominator metrics are reported as absent (None), never 0 or NaN.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterable, Mapping, Sequence

from .annotations import GoldLabelSet, Theme
from .errors import InputError
from .passages import Passage
from .pipeline import PipelineConfig

DECISION_POSITIVE = "positive"
DECISION_NEGATIVE = "negative"
DECISION_UNDECIDED = "undecided"
DECISIONS = (DECISION_POSITIVE, DECISION_NEGATIVE, DECISION_UNDECIDED)

SIDE_FP = "FP"  # annotator-negative, model-positive
SIDE_FN = "FN"  # annotator-positive, model-negative


def _passage_hits_gold(p: Passage, gold_positives: frozenset) -> bool:
    return any(i in gold_positives for i in p.member_indices())


def passage_precision(
    predicted: Sequence[Passage], gold: GoldLabelSet
) -> tuple[float | None, dict]:
    """Share of predicted passages containing at least one gold-positive sentence."""
    counts = {"predicted_passages": len(predicted), "hit_passages": 0}
    if not predicted:
        return None, counts
    theme = predicted[0].theme
    for p in predicted:
        if p.transcript_id != gold.transcript_id:
            raise InputError(
                f"passage transcript {p.transcript_id!r} does not match gold {gold.transcript_id!r}"
            )
        if p.theme != theme:
            raise InputError("mixed themes in predicted passage list")
    positives = gold.positives(theme)
    counts["hit_passages"] = sum(1 for p in predicted if _passage_hits_gold(p, positives))
    return counts["hit_passages"] / counts["predicted_passages"], counts


def rank_by_peak(predicted: Sequence[Passage]) -> list[Passage]:
    """Peak score descending; ties broken by lower start index first."""
    return sorted(predicted, key=lambda p: (-p.peak_score, p.start_sentence))


def top_k_precision(predicted: Sequence[Passage], gold: GoldLabelSet, k: int = 3) -> float | None:
    if not predicted:
        return None
    top = rank_by_peak(predicted)[: min(k, len(predicted))]
    value, _ = passage_precision(top, gold)
    return value


def sentence_recall(
    sentence_scores: Mapping[int, float],
    gold: GoldLabelSet,
    cfg: PipelineConfig,
    theme: Theme,
) -> tuple[float | None, dict]:
    """Share of gold-positive sentences the model also scores positive.

    Model-positive means the pre-gate aggregated score is strictly above the
    grouping threshold.
    """
    positives = gold.positives(theme)
    counts = {"gold_sentences": len(positives), "model_positive_gold_sentences": 0}
    if not positives:
        return None, counts
    hit = sum(1 for i in positives if sentence_scores.get(i, 0.0) > cfg.group_threshold)
    counts["model_positive_gold_sentences"] = hit
    return hit / len(positives), counts


@dataclass
class MetricReport:
    transcript_id: str
    theme: Theme
    passage_precision: float | None
    top_k_precision: float | None
    sentence_recall: float | None
    counts: dict

    def to_record(self) -> dict:
        return {
            "transcript_id": self.transcript_id,
            "theme": self.theme.code,
            "passage_precision": self.passage_precision,
            "top_k_precision": self.top_k_precision,
            "sentence_recall": self.sentence_recall,
            "counts": self.counts,
        }


def build_metric_report(
    transcript_id: str,
    theme: Theme,
    predicted: Sequence[Passage],
    sentence_scores: Mapping[int, float],
    gold: GoldLabelSet,
    cfg: PipelineConfig,
    k: int = 3,
) -> MetricReport:
    precision, p_counts = passage_precision(predicted, gold)
    recall, r_counts = sentence_recall(sentence_scores, gold, cfg, theme)
    return MetricReport(
        transcript_id=transcript_id,
        theme=theme,
        passage_precision=precision,
        top_k_precision=top_k_precision(predicted, gold, k),
        sentence_recall=recall,
        counts={**p_counts, **r_counts},
    )


@dataclass(frozen=True)
class ReviewedDecision:
    """The slice of a committed adjudication record the agreement math needs."""

    theme: Theme
    side: str  # SIDE_FP | SIDE_FN
    decision: str
    started_at: str | None = None
    ended_at: str | None = None


@dataclass
class DecisionCounts:
    positive: int = 0
    negative: int = 0
    undecided: int = 0

    @property
    def total(self) -> int:
        return self.positive + self.negative + self.undecided

    def add(self, decision: str) -> None:
        setattr(self, decision, getattr(self, decision) + 1)

    def to_dict(self) -> dict:
        return {"positive": self.positive, "negative": self.negative, "undecided": self.undecided}


@dataclass
class AgreementReport:
    theme: Theme
    fp_counts: DecisionCounts = field(default_factory=DecisionCounts)
    fn_counts: DecisionCounts = field(default_factory=DecisionCounts)
    model_lawyer_agreement: float | None = None
    fp_agreement: float | None = None
    undecided_share: float | None = None
    minutes_spent: float | None = None

    @property
    def total_read(self) -> int:
        return self.fp_counts.total + self.fn_counts.total

    def to_record(self) -> dict:
        return {
            "theme": self.theme.code,
            "fp_counts": self.fp_counts.to_dict(),
            "fn_counts": self.fn_counts.to_dict(),
            "model_lawyer_agreement": self.model_lawyer_agreement,
            "fp_agreement": self.fp_agreement,
            "undecided_share": self.undecided_share,
            "minutes_spent": self.minutes_spent,
            "total_read": self.total_read,
        }


def _minutes_between(started_at: str, ended_at: str) -> float:
    delta = datetime.fromisoformat(ended_at) - datetime.fromisoformat(started_at)
    return delta.total_seconds() / 60.0


def agreement_report(records: Iterable[ReviewedDecision], theme: Theme) -> AgreementReport:
    """Model-lawyer agreement over reviewed items of one theme.

    Agreement counts reviews matching the model's side of the disagreement
    (positive on FP items, negative on FN items), over everything read:
    undecided items are read but never agree.
    """
    report = AgreementReport(theme=theme)
    minutes = 0.0
    timed = 0
    for record in records:
        if record.theme != theme:
            continue
        if record.decision not in DECISIONS:
            raise InputError(f"unknown decision {record.decision!r}")
        if record.side == SIDE_FP:
            report.fp_counts.add(record.decision)
        elif record.side == SIDE_FN:
            report.fn_counts.add(record.decision)
        else:
            raise InputError(f"unknown queue side {record.side!r}")
        if record.started_at and record.ended_at:
            minutes += _minutes_between(record.started_at, record.ended_at)
            timed += 1
    total = report.total_read
    if total:
        report.model_lawyer_agreement = (
            report.fp_counts.positive + report.fn_counts.negative
        ) / total
        report.undecided_share = (
            report.fp_counts.undecided + report.fn_counts.undecided
        ) / total
    if report.fp_counts.total:
        report.fp_agreement = report.fp_counts.positive / report.fp_counts.total
    if timed:
        report.minutes_spent = minutes
    return report


def reviewed_decisions_from_records(rows: Iterable[Mapping]) -> list[ReviewedDecision]:
    """Adapt exported decision records (dicts) for the agreement arithmetic."""
    out = []
    for row in rows:
        out.append(
            ReviewedDecision(
                theme=Theme.from_code(row["theme"]),
                side=row["side"],
                decision=row["decision"],
                started_at=row.get("started_at"),
                ended_at=row.get("ended_at"),
            )
        )
    return out
