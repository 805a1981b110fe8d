"""Matplotlib renderings written alongside the delimited report output."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .annotations import GoldLabelSet, Theme
from .evaluation import AgreementReport
from .passages import Passage
from .pipeline import PipelineConfig


def render_score_curve(
    transcript_id: str,
    theme: Theme,
    sentence_scores: Mapping[int, float],
    cfg: PipelineConfig,
    out_path: Path | str,
    predicted: Sequence[Passage] = (),
    gold: GoldLabelSet | None = None,
) -> Path:
    """Per-sentence score series with thresholds and passage/gold shading."""
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    indices = sorted(sentence_scores)
    values = [sentence_scores[i] for i in indices]

    fig, ax = plt.subplots(figsize=(10, 3.2))
    ax.plot(indices, values, lw=0.9, color="#30507a", label="sentence score")
    ax.axhline(cfg.group_threshold, color="#b0812c", lw=0.8, ls="--", label=f"group > {cfg.group_threshold}")
    ax.axhline(cfg.gate_threshold, color="#a03030", lw=0.8, ls=":", label=f"gate > {cfg.gate_threshold}")
    for p in predicted:
        ax.axvspan(p.start_sentence - 0.5, p.end_sentence + 0.5, color="#30507a", alpha=0.15)
    if gold is not None:
        for i in gold.sorted_positives(theme):
            ax.axvspan(i - 0.5, i + 0.5, color="#2c7a39", alpha=0.12)
    ax.set_xlabel("sentence index")
    ax.set_ylabel("score")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(f"{transcript_id} / {theme.code}")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_agreement_chart(reports: Sequence[AgreementReport], out_path: Path | str) -> Path:
    """Stacked decision counts per theme with the agreement rate overlaid."""
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    themes = [r.theme.code for r in reports]
    agree = [r.fp_counts.positive + r.fn_counts.negative for r in reports]
    disagree = [r.fp_counts.negative + r.fn_counts.positive for r in reports]
    undecided = [r.fp_counts.undecided + r.fn_counts.undecided for r in reports]

    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.bar(themes, agree, color="#2c7a39", label="agree with model")
    ax.bar(themes, disagree, bottom=agree, color="#a03030", label="disagree")
    bottoms = [a + d for a, d in zip(agree, disagree)]
    ax.bar(themes, undecided, bottom=bottoms, color="#9a9a9a", label="undecided")
    for x, report in enumerate(reports):
        if report.model_lawyer_agreement is not None:
            ax.text(
                x,
                report.total_read + 0.4,
                f"{report.model_lawyer_agreement:.1%}",
                ha="center",
                fontsize=8,
            )
    ax.set_ylabel("reviewed passages")
    ax.set_title("model-lawyer agreement by theme")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def figures_dir_for(report_path: Path | str) -> Path:
    """Default figures directory next to a report file: report.jsonl -> report.figures/."""
    report_path = Path(report_path)
    return report_path.parent / (report_path.stem + ".figures")
