"""Command-line entry points for the whole pipeline and the review service."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import annotations as ann
from . import corpus as corpus_mod
from . import evaluation as ev
from . import figures
from . import passages as pas
from . import pipeline as pipe
from . import reference as ref
from . import review
from . import scoring
from .errors import TriageError
from .jsonl import read_records, write_records


def _config_from_args(args: argparse.Namespace) -> pipe.PipelineConfig:
    kwargs = {}
    if getattr(args, "seed", None) is not None:
        kwargs["rng_seed"] = args.seed
    return pipe.PipelineConfig(**kwargs)


def cmd_ingest(args: argparse.Namespace) -> int:
    raw = corpus_mod.read_raw_text(args.infile)
    transcript = corpus_mod.segment_transcript(raw, args.id, args.alias or [])
    corpus_mod.store_transcript(transcript, args.out)
    if not transcript.defendant_aliases:
        print(f"warning: transcript {args.id} stored without defendant aliases", file=sys.stderr)
    print(f"stored {args.id}: {len(transcript)} sentences")
    return 0


def cmd_annotations_import(args: argparse.Namespace) -> int:
    corpus = corpus_mod.load_corpus(args.corpus)
    result = ann.import_annotations(args.infile, corpus)
    for error in result.errors:
        print(f"row {error.row_number}: {error.message}", file=sys.stderr)
    if args.out:
        ann.store_annotations(result.annotations, args.out)
    print(f"accepted {len(result.annotations)} rows, rejected {len(result.errors)}")
    return 1 if result.errors else 0


def _load_gold(gold_file: Path, corpus: dict) -> dict:
    result = ann.import_annotations(gold_file, corpus)
    if result.errors:
        for error in result.errors:
            print(f"row {error.row_number}: {error.message}", file=sys.stderr)
        raise TriageError(f"{gold_file}: {len(result.errors)} invalid annotation rows")
    return ann.to_gold_labels(result.annotations)


def cmd_score(args: argparse.Namespace) -> int:
    theme = ann.Theme.from_code(args.theme)
    cfg = _config_from_args(args)
    scorer = scoring.make_scorer(args.scorer)
    corpus = corpus_mod.load_corpus(args.corpus)
    ids = args.transcript or sorted(corpus)
    for tid in ids:
        transcript = corpus[tid]
        windows = pipe.build_windows(transcript, cfg)
        window_scores, meta = scoring.score_windows(windows, theme, scorer)
        sentence_scores = pipe.aggregate_sentence_scores(window_scores, transcript, cfg)
        table = pipe.ScoreTable(tid, theme, window_scores, sentence_scores, meta)
        pipe.store_score_table(table, args.out)
        print(f"scored {tid}/{theme.code}: {len(windows)} windows")
    return 0


def cmd_gate(args: argparse.Namespace) -> int:
    theme = ann.Theme.from_code(args.theme)
    cfg = _config_from_args(args)
    resolver = ref.make_resolver(args.resolver, args.names)
    corpus = corpus_mod.load_corpus(args.corpus)
    out_dir = Path(args.out)
    for tid in pipe.list_scored_transcripts(args.scores, theme):
        transcript = corpus[tid]
        table = pipe.load_score_table(args.scores, tid, theme)
        flags = ref.gate_sentences(transcript, table.sentence_scores, cfg, resolver)
        checked = sum(1 for f in flags.values() if f.checked)
        write_records(
            out_dir / f"{tid}.{theme.code}.jsonl",
            (
                {
                    "index": i,
                    "checked": f.checked,
                    "mentions_defendant": f.mentions_defendant,
                    "rule": f.rule_fired.value if f.rule_fired else None,
                }
                for i, f in sorted(flags.items())
            ),
        )
        print(f"gated {tid}/{theme.code}: {checked} sentences checked")
    return 0


def _load_flags(flags_dir: Path, tid: str, theme: ann.Theme) -> dict:
    path = Path(flags_dir) / f"{tid}.{theme.code}.jsonl"
    return {row["index"]: bool(row["mentions_defendant"]) for row in read_records(path)}


def cmd_extract(args: argparse.Namespace) -> int:
    theme = ann.Theme.from_code(args.theme)
    cfg = _config_from_args(args)
    all_passages = []
    for tid in pipe.list_scored_transcripts(args.scores, theme):
        table = pipe.load_score_table(args.scores, tid, theme)
        flags = _load_flags(args.flags, tid, theme)
        all_passages.extend(
            pas.extract_predicted_passages(tid, theme, table.sentence_scores, flags, cfg)
        )
    pas.store_passages(all_passages, args.out)
    print(f"extracted {len(all_passages)} passages -> {args.out}")
    return 0


def cmd_export_train(args: argparse.Namespace) -> int:
    theme = ann.Theme.from_code(args.theme)
    cfg = _config_from_args(args)
    corpus = corpus_mod.load_corpus(args.corpus)
    gold = _load_gold(args.gold, corpus)
    for tid in corpus:
        gold.setdefault(tid, ann.GoldLabelSet(tid))
    transcripts = [corpus[tid] for tid in sorted(corpus)]
    export = pipe.export_training_corpus(transcripts, gold, theme, cfg)
    paths = pipe.write_training_export(export, theme, args.out)
    total = sum(len(v) for v in export.examples_by_transcript.values())
    if export.zero_positive_transcripts:
        print(
            f"warning: zero positive windows in {', '.join(export.zero_positive_transcripts)}",
            file=sys.stderr,
        )
    print(f"exported {total} examples, {len(export.folds)} folds -> {paths['examples']}")
    return 0


def _predicted_for_eval(args: argparse.Namespace, theme: ann.Theme, cfg: pipe.PipelineConfig, tid: str, table: pipe.ScoreTable) -> list:
    if args.passages:
        return [
            p
            for p in pas.load_passages(args.passages)
            if p.transcript_id == tid and p.theme == theme
        ]
    if not args.flags:
        raise TriageError("eval needs --passages or --flags to know the predicted passages")
    flags = _load_flags(args.flags, tid, theme)
    return pas.extract_predicted_passages(tid, theme, table.sentence_scores, flags, cfg)


def cmd_eval(args: argparse.Namespace) -> int:
    theme = ann.Theme.from_code(args.theme)
    cfg = _config_from_args(args)
    corpus = corpus_mod.load_corpus(args.corpus)
    gold = _load_gold(args.gold, corpus)
    reports = []
    rendered = []
    fig_dir = Path(args.figures) if args.figures else figures.figures_dir_for(args.out)
    for tid in pipe.list_scored_transcripts(args.scores, theme):
        table = pipe.load_score_table(args.scores, tid, theme)
        labels = gold.get(tid, ann.GoldLabelSet(tid))
        predicted = _predicted_for_eval(args, theme, cfg, tid, table)
        report = ev.build_metric_report(tid, theme, predicted, table.sentence_scores, labels, cfg)
        reports.append(report)
        if not args.no_figures:
            rendered.append(
                figures.render_score_curve(
                    tid,
                    theme,
                    table.sentence_scores,
                    cfg,
                    fig_dir / f"{tid}.{theme.code}.png",
                    predicted=predicted,
                    gold=labels,
                )
            )
    write_records(args.out, (r.to_record() for r in reports))
    print(f"wrote {len(reports)} reports -> {args.out}")
    if rendered:
        print(f"rendered {len(rendered)} figures -> {fig_dir}")
    return 0


def cmd_queue(args: argparse.Namespace) -> int:
    theme = ann.Theme.from_code(args.theme)
    cfg = _config_from_args(args)
    corpus = corpus_mod.load_corpus(args.corpus)
    gold = _load_gold(args.gold, corpus)
    predicted = []
    gold_passages = []
    sentence_scores = {}
    scorer_meta = {}
    for tid in pipe.list_scored_transcripts(args.scores, theme):
        table = pipe.load_score_table(args.scores, tid, theme)
        sentence_scores[tid] = table.sentence_scores
        scorer_meta = table.scorer_meta or scorer_meta
        if args.passages:
            predicted.extend(
                p
                for p in pas.load_passages(args.passages)
                if p.transcript_id == tid and p.theme == theme
            )
        else:
            if not args.flags:
                raise TriageError("queue needs --passages or --flags")
            flags = _load_flags(args.flags, tid, theme)
            predicted.extend(
                pas.extract_predicted_passages(tid, theme, table.sentence_scores, flags, cfg)
            )
        labels = gold.get(tid)
        if labels is not None:
            gold_passages.extend(
                pas.with_peak_scores(pas.derive_gold_passages(labels, theme), table.sentence_scores)
            )
    queue = review.build_queue(
        predicted, gold_passages, gold, sentence_scores, cfg, theme,
        fn_count=args.fn_count, scorer_meta=scorer_meta,
    )
    review.store_queue(queue, args.out)
    fp = sum(1 for i in queue.items if i.side == ev.SIDE_FP)
    print(f"queued {len(queue.items)} items ({fp} FP, {len(queue.items) - fp} FN) -> {args.out}")
    return 0


def cmd_agreement(args: argparse.Namespace) -> int:
    rows = list(read_records(args.records))
    decisions = ev.reviewed_decisions_from_records(rows)
    themes = [ann.Theme.from_code(args.theme)] if args.theme else list(ann.Theme)
    reports = [ev.agreement_report(decisions, theme) for theme in themes]
    for report in reports:
        value = report.model_lawyer_agreement
        shown = f"{value:.4f}" if value is not None else "absent"
        print(f"{report.theme.code}: agreement={shown} read={report.total_read}")
    if args.out:
        write_records(args.out, (r.to_record() for r in reports))
    if not args.no_figures:
        out_base = Path(args.out) if args.out else Path(args.records)
        fig_dir = Path(args.figures) if args.figures else figures.figures_dir_for(out_base)
        path = figures.render_agreement_chart(reports, fig_dir / "agreement.png")
        print(f"rendered {path}")
    return 0


def cmd_decisions_export(args: argparse.Namespace) -> int:
    store = review.DecisionStore(Path(args.state) / "decisions.jsonl")
    records = review.export_decisions(store)
    write_records(args.out, records)
    print(f"exported {len(records)} decisions -> {args.out}")
    return 0


def _metrics_context(args: argparse.Namespace):
    """Evaluation inputs for /reports/metrics; needs scores, gold, and passages."""
    if not (args.scores and args.gold and args.passages):
        return None
    from .gateway import MetricsContext

    corpus = corpus_mod.load_corpus(args.corpus)
    gold = _load_gold(args.gold, corpus)
    predicted: dict = {}
    for p in pas.load_passages(args.passages):
        predicted.setdefault((p.transcript_id, p.theme), []).append(p)
    sentence_scores: dict = {}
    for theme in ann.Theme:
        for tid in pipe.list_scored_transcripts(args.scores, theme):
            table = pipe.load_score_table(args.scores, tid, theme)
            sentence_scores[(tid, theme)] = table.sentence_scores
            predicted.setdefault((tid, theme), [])
    return MetricsContext(
        predicted=predicted,
        sentence_scores=sentence_scores,
        gold_labels=gold,
        cfg=pipe.PipelineConfig(),
    )


def cmd_serve(args: argparse.Namespace) -> int:
    from . import gateway

    state_dir = Path(os.environ.get("TRIAGE_STATE_DIR", args.state))
    gateway.serve(
        corpus_dir=args.corpus,
        state_dir=state_dir,
        port=args.port,
        host=args.host,
        metrics=_metrics_context(args),
        ui_dir=args.ui,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="triage", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="normalize and segment a raw transcript")
    p.add_argument("--in", dest="infile", required=True, type=Path)
    p.add_argument("--id", required=True)
    p.add_argument("--alias", action="append", default=[])
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("annotations", help="annotation file operations")
    ann_sub = p.add_subparsers(dest="subcommand", required=True)
    pi = ann_sub.add_parser("import", help="validate annotation rows against a corpus")
    pi.add_argument("--in", dest="infile", required=True, type=Path)
    pi.add_argument("--corpus", required=True, type=Path)
    pi.add_argument("--out", type=Path)
    pi.set_defaults(func=cmd_annotations_import)

    p = sub.add_parser("score", help="score sliding windows and aggregate per sentence")
    p.add_argument("--theme", required=True)
    p.add_argument("--scorer", required=True, help="lexicon:<file> or http:<url>")
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--transcript", action="append")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("gate", help="run defendant-reference checks above the gate threshold")
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--scores", required=True, type=Path)
    p.add_argument("--resolver", default="builtin", help="builtin or http:<url>")
    p.add_argument("--names", type=Path, help="feminine name list for the builtin resolver")
    p.add_argument("--theme", required=True)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_gate)

    p = sub.add_parser("extract", help="group scored sentences into predicted passages")
    p.add_argument("--theme", required=True)
    p.add_argument("--scores", required=True, type=Path)
    p.add_argument("--flags", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("export-train", help="export the undersampled training corpus and folds")
    p.add_argument("--theme", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--gold", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_export_train)

    p = sub.add_parser("eval", help="compute precision/recall reports")
    p.add_argument("--theme", required=True)
    p.add_argument("--gold", required=True, type=Path)
    p.add_argument("--scores", required=True, type=Path)
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--passages", type=Path)
    p.add_argument("--flags", type=Path)
    p.add_argument("--figures", type=Path)
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("queue", help="build the blinded disagreement review queue")
    p.add_argument("--theme", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--scores", required=True, type=Path)
    p.add_argument("--gold", required=True, type=Path)
    p.add_argument("--passages", type=Path)
    p.add_argument("--flags", type=Path)
    p.add_argument("--fn-count", type=int)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_queue)

    p = sub.add_parser("agreement", help="adjudication agreement arithmetic")
    p.add_argument("--records", required=True, type=Path)
    p.add_argument("--theme")
    p.add_argument("--out", type=Path)
    p.add_argument("--figures", type=Path)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_agreement)

    p = sub.add_parser("decisions", help="decision store operations")
    dec_sub = p.add_subparsers(dest="subcommand", required=True)
    pe = dec_sub.add_parser("export", help="export committed decision records")
    pe.add_argument("--state", required=True, type=Path)
    pe.add_argument("--out", required=True, type=Path)
    pe.set_defaults(func=cmd_decisions_export)

    p = sub.add_parser("serve", help="run the review gateway")
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--state", type=Path, default=Path("state"))
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", type=Path)
    p.add_argument("--scores", type=Path, help="enable /reports/metrics (with --gold and --passages)")
    p.add_argument("--gold", type=Path)
    p.add_argument("--passages", type=Path)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TriageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
