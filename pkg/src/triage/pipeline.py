"""Sliding windows, per-sentence score aggregation, and training-corpus export."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .annotations import GoldLabelSet, Theme
from .corpus import Transcript
from .errors import ConfigurationError, IncompleteScoresError
from .jsonl import read_records, write_records

SCORES_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class PipelineConfig:
    """All tunable constants of the extraction pipeline in one place."""

    window_size: int = 10
    step: int = 1
    group_threshold: float = 0.5
    gate_threshold: float = 0.9
    neg_pos_ratio: int = 3
    rng_seed: int = 0
    fn_queue_min: int = 6
    fn_queue_max: int = 8
    fp_queue_size: int = 3
    context_back: int = 19

    def __post_init__(self) -> None:
        if not (0 < self.step <= self.window_size):
            raise ConfigurationError("step must satisfy 0 < step <= window_size")
        if not (0.0 <= self.group_threshold <= self.gate_threshold <= 1.0):
            raise ConfigurationError("thresholds must satisfy 0 <= group <= gate <= 1")
        if self.neg_pos_ratio < 1:
            raise ConfigurationError("neg_pos_ratio must be >= 1")
        if self.fn_queue_min > self.fn_queue_max:
            raise ConfigurationError("fn_queue_min must be <= fn_queue_max")

    def to_dict(self) -> dict:
        return {
            "window_size": self.window_size,
            "step": self.step,
            "group_threshold": self.group_threshold,
            "gate_threshold": self.gate_threshold,
            "neg_pos_ratio": self.neg_pos_ratio,
            "rng_seed": self.rng_seed,
            "fn_queue_min": self.fn_queue_min,
            "fn_queue_max": self.fn_queue_max,
            "fp_queue_size": self.fp_queue_size,
            "context_back": self.context_back,
        }


@dataclass(frozen=True)
class Window:
    transcript_id: str
    start_sentence: int
    length: int
    text: str

    @property
    def window_id(self) -> str:
        return f"{self.transcript_id}:{self.start_sentence}"

    def member_indices(self) -> range:
        return range(self.start_sentence, self.start_sentence + self.length)


@dataclass
class ScoreTable:
    """Window scores plus their per-sentence aggregation for one transcript."""

    transcript_id: str
    theme: Theme
    window_scores: dict
    sentence_scores: dict
    scorer_meta: dict = field(default_factory=dict)


def window_starts(n_sentences: int, cfg: PipelineConfig) -> list[int]:
    if n_sentences <= 0:
        return []
    if n_sentences < cfg.window_size:
        return [0]
    return list(range(0, n_sentences - cfg.window_size + 1, cfg.step))


def build_windows(t: Transcript, cfg: PipelineConfig) -> list[Window]:
    """Enumerate sliding windows; short transcripts get one full-coverage window."""
    n = len(t)
    texts = t.sentence_texts()
    length = min(cfg.window_size, n)
    return [
        Window(
            transcript_id=t.transcript_id,
            start_sentence=start,
            length=length,
            text=" ".join(texts[start : start + length]),
        )
        for start in window_starts(n, cfg)
    ]


def containing_starts(sentence_index: int, n_sentences: int, cfg: PipelineConfig) -> list[int]:
    """Starts of the windows that contain the sentence, by direct arithmetic."""
    if n_sentences < cfg.window_size:
        return [0] if 0 <= sentence_index < n_sentences else []
    lo = max(0, sentence_index - cfg.window_size + 1)
    hi = min(sentence_index, n_sentences - cfg.window_size)
    first = -(-lo // cfg.step) * cfg.step  # smallest multiple of step >= lo
    return list(range(first, hi + 1, cfg.step))


def aggregate_sentence_scores(
    window_scores: Mapping[int, float], t: Transcript, cfg: PipelineConfig
) -> dict[int, float]:
    """Mean window score over the windows containing each sentence.

    Edge sentences average over their actual, smaller window count.
    """
    n = len(t)
    expected = window_starts(n, cfg)
    missing = [s for s in expected if s not in window_scores]
    if missing:
        raise IncompleteScoresError(
            f"{t.transcript_id}: missing scores for window starts {missing[:5]}"
            + ("..." if len(missing) > 5 else "")
        )
    out: dict[int, float] = {}
    for i in range(n):
        starts = containing_starts(i, n, cfg)
        out[i] = sum(window_scores[s] for s in starts) / len(starts)
    return out


def store_score_table(table: ScoreTable, scores_dir: Path | str) -> Path:
    path = Path(scores_dir) / f"{table.transcript_id}.{table.theme.code}.jsonl"
    header = {
        "schema_version": SCORES_SCHEMA_VERSION,
        "transcript_id": table.transcript_id,
        "theme_code": table.theme.code,
        "scorer_meta": table.scorer_meta,
    }
    rows = [header]
    rows += [{"kind": "window", "start": s, "score": v} for s, v in sorted(table.window_scores.items())]
    rows += [{"kind": "sentence", "index": i, "score": v} for i, v in sorted(table.sentence_scores.items())]
    write_records(path, rows)
    return path


def load_score_table(scores_dir: Path | str, transcript_id: str, theme: Theme) -> ScoreTable:
    path = Path(scores_dir) / f"{transcript_id}.{theme.code}.jsonl"
    rows = iter(read_records(path))
    header = next(rows)
    table = ScoreTable(
        transcript_id=header["transcript_id"],
        theme=Theme.from_code(header["theme_code"]),
        window_scores={},
        sentence_scores={},
        scorer_meta=dict(header.get("scorer_meta", {})),
    )
    for row in rows:
        if row["kind"] == "window":
            table.window_scores[row["start"]] = row["score"]
        else:
            table.sentence_scores[row["index"]] = row["score"]
    return table


def list_scored_transcripts(scores_dir: Path | str, theme: Theme) -> list[str]:
    suffix = f".{theme.code}.jsonl"
    return sorted(p.name[: -len(suffix)] for p in Path(scores_dir).glob(f"*{suffix}"))


@dataclass(frozen=True)
class TrainingExample:
    window: Window
    theme: Theme
    label: str  # "positive" | "negative"


@dataclass(frozen=True)
class FoldManifest:
    fold_id: str
    held_out_transcript_id: str
    train_transcript_ids: tuple[str, ...]


@dataclass
class TrainingExport:
    examples_by_transcript: dict
    folds: list[FoldManifest]
    zero_positive_transcripts: list[str]


def window_label(window: Window, gold: GoldLabelSet, theme: Theme) -> str:
    positives = gold.positives(theme)
    return "positive" if any(i in positives for i in window.member_indices()) else "negative"


def export_training_corpus(
    transcripts: Sequence[Transcript],
    gold: Mapping[str, GoldLabelSet],
    theme: Theme,
    cfg: PipelineConfig,
) -> TrainingExport:
    """Per transcript, keep every positive window and undersample negatives.

    Negatives are drawn without replacement to neg_pos_ratio times the
    positive count (clamped to availability) with an RNG derived from the
    seed and the transcript id, so exports are reproducible byte for byte.
    Transcripts with zero positives keep zero negatives and are flagged.
    """
    examples: dict[str, list[TrainingExample]] = {}
    zero_positive: list[str] = []
    for t in transcripts:
        labels = gold.get(t.transcript_id)
        if labels is None:
            raise IncompleteScoresError(f"no gold labels for transcript {t.transcript_id!r}")
        windows = build_windows(t, cfg)
        positives = [w for w in windows if window_label(w, labels, theme) == "positive"]
        negatives = [w for w in windows if window_label(w, labels, theme) == "negative"]
        if not positives:
            zero_positive.append(t.transcript_id)
            sampled: list[Window] = []
        else:
            k = min(cfg.neg_pos_ratio * len(positives), len(negatives))
            rng = random.Random(f"{cfg.rng_seed}:{theme.code}:{t.transcript_id}")
            sampled = rng.sample(negatives, k)
        examples[t.transcript_id] = [TrainingExample(w, theme, "positive") for w in positives] + [
            TrainingExample(w, theme, "negative") for w in sampled
        ]
    folds = leave_one_out_folds([t.transcript_id for t in transcripts])
    return TrainingExport(examples, folds, zero_positive)


def leave_one_out_folds(transcript_ids: Iterable[str]) -> list[FoldManifest]:
    ids = sorted(transcript_ids)
    return [
        FoldManifest(
            fold_id=f"fold-{i:02d}",
            held_out_transcript_id=held_out,
            train_transcript_ids=tuple(x for x in ids if x != held_out),
        )
        for i, held_out in enumerate(ids)
    ]


def write_training_export(export: TrainingExport, theme: Theme, out_dir: Path | str) -> dict:
    """Write example, fold, and metadata files; returns their paths."""
    out_dir = Path(out_dir)
    examples_path = out_dir / f"train.{theme.code}.jsonl"
    folds_path = out_dir / f"folds.{theme.code}.jsonl"
    meta_path = out_dir / f"meta.{theme.code}.json"
    write_records(
        examples_path,
        (
            {
                "transcript_id": ex.window.transcript_id,
                "window_start": ex.window.start_sentence,
                "theme": ex.theme.code,
                "label": ex.label,
                "text": ex.window.text,
            }
            for tid in sorted(export.examples_by_transcript)
            for ex in export.examples_by_transcript[tid]
        ),
    )
    write_records(
        folds_path,
        (
            {
                "fold_id": f.fold_id,
                "held_out_transcript_id": f.held_out_transcript_id,
                "train_transcript_ids": list(f.train_transcript_ids),
            }
            for f in export.folds
        ),
    )
    write_records(
        meta_path,
        [
            {
                "theme": theme.code,
                "zero_positive_transcripts": sorted(export.zero_positive_transcripts),
            }
        ],
    )
    return {"examples": examples_path, "folds": folds_path, "meta": meta_path}
