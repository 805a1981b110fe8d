"""Grouping scored sentences (or gold labels) into contiguous passages."""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping

from .annotations import GoldLabelSet, Theme
from .jsonl import read_records, write_records
from .pipeline import PipelineConfig

ORIGIN_PREDICTED = "predicted"
ORIGIN_GOLD = "gold"


@dataclass(frozen=True)
class Passage:
    transcript_id: str
    theme: Theme
    start_sentence: int
    end_sentence: int  # inclusive
    peak_score: float
    origin: str
    defendant_gated: bool

    def member_indices(self) -> range:
        return range(self.start_sentence, self.start_sentence + self.length)

    @property
    def length(self) -> int:
        return self.end_sentence - self.start_sentence + 1


def _contiguous_runs(indices: Iterable[int]) -> list[tuple[int, int]]:
    runs: list[tuple[int, int]] = []
    for i in sorted(indices):
        if runs and i == runs[-1][1] + 1:
            runs[-1] = (runs[-1][0], i)
        else:
            runs.append((i, i))
    return runs


def extract_predicted_passages(
    transcript_id: str,
    theme: Theme,
    sentence_scores: Mapping[int, float],
    defendant_flags: Mapping[int, bool],
    cfg: PipelineConfig,
) -> list[Passage]:
    """Maximal runs of sentences scoring strictly above the grouping threshold,
    kept only when some member scores strictly above the gate threshold and
    is flagged as mentioning the defendant."""
    above = [i for i, score in sentence_scores.items() if score > cfg.group_threshold]
    passages = []
    for start, end in _contiguous_runs(above):
        members = range(start, end + 1)
        gated = any(
            sentence_scores[i] > cfg.gate_threshold and defendant_flags.get(i, False)
            for i in members
        )
        if not gated:
            continue
        passages.append(
            Passage(
                transcript_id=transcript_id,
                theme=theme,
                start_sentence=start,
                end_sentence=end,
                peak_score=max(sentence_scores[i] for i in members),
                origin=ORIGIN_PREDICTED,
                defendant_gated=True,
            )
        )
    return passages


def derive_gold_passages(gold: GoldLabelSet, theme: Theme) -> list[Passage]:
    """Maximal runs of gold-positive sentences; peak scores filled in later."""
    return [
        Passage(
            transcript_id=gold.transcript_id,
            theme=theme,
            start_sentence=start,
            end_sentence=end,
            peak_score=0.0,
            origin=ORIGIN_GOLD,
            defendant_gated=False,
        )
        for start, end in _contiguous_runs(gold.positives(theme))
    ]


def with_peak_scores(passages: Iterable[Passage], sentence_scores: Mapping[int, float]) -> list[Passage]:
    """Fill peak_score from aggregated sentence scores (0 for unscored members)."""
    return [
        replace(p, peak_score=max((sentence_scores.get(i, 0.0) for i in p.member_indices()), default=0.0))
        for p in passages
    ]


def passage_to_record(p: Passage) -> dict:
    return {
        "transcript_id": p.transcript_id,
        "theme": p.theme.code,
        "start": p.start_sentence,
        "end": p.end_sentence,
        "peak_score": p.peak_score,
        "origin": p.origin,
        "defendant_gated": p.defendant_gated,
    }


def passage_from_record(row: Mapping) -> Passage:
    return Passage(
        transcript_id=row["transcript_id"],
        theme=Theme.from_code(row["theme"]),
        start_sentence=row["start"],
        end_sentence=row["end"],
        peak_score=row["peak_score"],
        origin=row["origin"],
        defendant_gated=row["defendant_gated"],
    )


def store_passages(passages: Iterable[Passage], path: Path | str) -> None:
    write_records(path, (passage_to_record(p) for p in passages))


def load_passages(path: Path | str) -> list[Passage]:
    return [passage_from_record(row) for row in read_records(path)]
