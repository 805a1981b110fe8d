from __future__ import annotations

from pathlib import Path

import pytest

from triage.corpus import Sentence, Transcript

DATA_DIR = Path(__file__).parent / "data"

FILLER = "the witness described the events of that evening calmly."


def make_transcript(
    n: int,
    transcript_id: str = "trial-x",
    aliases: tuple[str, ...] = ("ms. carter", "carter"),
    texts: list[str] | None = None,
) -> Transcript:
    """Directly assemble a transcript with synthetic but monotone char spans."""
    if texts is None:
        texts = [FILLER] * n
    assert len(texts) == n
    sentences = []
    offset = 0
    for i, text in enumerate(texts):
        sentences.append(Sentence(index=i, text=text, char_span=(offset, offset + len(text))))
        offset += len(text) + 1
    return Transcript(
        transcript_id=transcript_id,
        defendant_aliases=aliases,
        sentences=tuple(sentences),
        source_meta={},
    )


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    rows = []
    for outcome, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance" in nodeid and getattr(report, "when", "call") in ("call", "setup"):
                name = nodeid.split("::")[-1]
                if label == "PASS" and report.when != "call":
                    continue
                rows.append((name, label))
    if rows:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, label in dict(rows).items():
            terminalreporter.write_line(f"{label}  {name}")
