"""Expert span annotations for the four themes, normalized to sentence labels."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .corpus import Transcript
from .jsonl import read_records, write_records


class Theme(enum.Enum):
    """The four gender-stereotype discourse categories."""

    EMOT = "inappropriate emotional expression, or the absence of emotion"
    SEX = "hypersexualizing the defendant"
    NORM = "betrayal of gender norms: manipulative, greedy, evil, deceitful"
    MOM = "characterizing the defendant as a bad mother"

    @property
    def code(self) -> str:
        return self.name

    @property
    def description(self) -> str:
        return self.value

    @classmethod
    def from_code(cls, code: str) -> "Theme":
        try:
            return cls[code]
        except KeyError:
            raise ValueError(f"unknown theme code {code!r}") from None


THEMES = tuple(Theme)


@dataclass(frozen=True)
class GoldAnnotation:
    """One annotator-attributed contiguous sentence span for one theme."""

    transcript_id: str
    theme: Theme
    start_sentence: int
    end_sentence: int  # inclusive
    annotator_id: str


@dataclass(frozen=True)
class RowError:
    row_number: int
    message: str


@dataclass
class ImportResult:
    annotations: list[GoldAnnotation]
    errors: list[RowError]

    @property
    def ok(self) -> bool:
        return not self.errors


@dataclass(frozen=True)
class GoldLabelSet:
    """Per-theme sets of gold-positive sentence indices for one transcript."""

    transcript_id: str
    by_theme: dict = field(default_factory=dict)

    def positives(self, theme: Theme) -> frozenset:
        return self.by_theme.get(theme, frozenset())

    def sorted_positives(self, theme: Theme) -> list[int]:
        return sorted(self.positives(theme))


def _check_row(row: dict, row_number: int, corpus: Mapping[str, Transcript]) -> GoldAnnotation | RowError:
    try:
        tid = row["transcript_id"]
        code = row["theme_code"]
        start = int(row["start_sentence"])
        end = int(row["end_sentence"])
        annotator = row["annotator_id"]
    except (KeyError, TypeError, ValueError) as exc:
        return RowError(row_number, f"malformed row: {exc}")
    if tid not in corpus:
        return RowError(row_number, f"unknown transcript {tid!r}")
    try:
        theme = Theme.from_code(code)
    except ValueError:
        return RowError(row_number, f"unknown theme code {code!r}")
    n = len(corpus[tid])
    if start < 0:
        return RowError(row_number, "start_sentence out of range")
    if end >= n:
        return RowError(row_number, "end_sentence out of range")
    if start > end:
        return RowError(row_number, "start_sentence greater than end_sentence")
    return GoldAnnotation(tid, theme, start, end, annotator)


def import_annotations(file: Path | str, corpus: Mapping[str, Transcript]) -> ImportResult:
    """Read annotation records, collecting row errors instead of failing fast.

    Valid rows come back in file order; every rejected row is reported with
    its 1-based line number.
    """
    annotations: list[GoldAnnotation] = []
    errors: list[RowError] = []
    for row_number, row in enumerate(read_records(file), start=1):
        checked = _check_row(row, row_number, corpus)
        if isinstance(checked, RowError):
            errors.append(checked)
        else:
            annotations.append(checked)
    return ImportResult(annotations, errors)


def to_gold_labels(annotations: Iterable[GoldAnnotation]) -> dict[str, GoldLabelSet]:
    """Union overlapping spans into per-transcript, per-theme index sets."""
    acc: dict[str, dict[Theme, set]] = {}
    for ann in annotations:
        per_theme = acc.setdefault(ann.transcript_id, {})
        per_theme.setdefault(ann.theme, set()).update(range(ann.start_sentence, ann.end_sentence + 1))
    return {
        tid: GoldLabelSet(tid, {theme: frozenset(idx) for theme, idx in per_theme.items()})
        for tid, per_theme in acc.items()
    }


def store_annotations(annotations: Iterable[GoldAnnotation], path: Path | str) -> None:
    write_records(
        path,
        (
            {
                "transcript_id": a.transcript_id,
                "theme_code": a.theme.code,
                "start_sentence": a.start_sentence,
                "end_sentence": a.end_sentence,
                "annotator_id": a.annotator_id,
            }
            for a in annotations
        ),
    )
