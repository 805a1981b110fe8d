"""Transcript ingestion: normalization, sentence segmentation, persistence.

Normalization order is fixed: lowercase, delete digit characters, split into
sentences, drop sentences with fewer than three words. Kept sentences are
reindexed contiguously; char spans keep pointing into the normalized source
so nothing loses traceability.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import IngestionError, SchemaVersionError, TranscriptNotFoundError
from .jsonl import read_records, write_records

SCHEMA_VERSION = 1
MIN_WORDS = 3

# Tokens that keep a following "." from ending a sentence (post-lowercasing).
# "q"/"a" cover the question/answer speaker markers common in trial style.
ABBREVIATIONS = frozenset({"mr", "mrs", "ms", "dr", "q", "a", "vs", "st", "jr", "sr"})

_DIGIT_RE = re.compile(r"\d")
_SAFE_ID_RE = re.compile(r"^[A-Za-z0-9._-]+$")
_TERMINALS = ".?!"


@dataclass(frozen=True)
class Sentence:
    index: int
    text: str
    char_span: tuple[int, int]


@dataclass(frozen=True)
class Transcript:
    transcript_id: str
    defendant_aliases: tuple[str, ...]
    sentences: tuple[Sentence, ...]
    source_meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.sentences)

    def sentence_texts(self) -> list[str]:
        return [s.text for s in self.sentences]


def normalize_text(raw: str) -> str:
    """Lowercase and delete decimal digit characters; whitespace untouched."""
    return _DIGIT_RE.sub("", raw.lower())


def _abbreviation_before(text: str, dot_index: int) -> bool:
    # The maximal alphabetic run immediately left of the "." decides.
    k = dot_index
    while k > 0 and text[k - 1].isalpha():
        k -= 1
    return k < dot_index and text[k:dot_index] in ABBREVIATIONS


def _raw_sentence_spans(text: str) -> list[tuple[int, int]]:
    """Boundary spans over normalized text, untrimmed.

    A boundary sits after ".", "?" or "!" followed by whitespace (unless the
    "." closes a known abbreviation) and at any newline-newline break.
    """
    spans: list[tuple[int, int]] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in _TERMINALS and (i + 1 == n or text[i + 1].isspace()):
            if not (ch == "." and _abbreviation_before(text, i)):
                spans.append((start, i + 1))
                start = i + 1
        elif ch == "\n" and i + 1 < n and text[i + 1] == "\n":
            spans.append((start, i))
            start = i
        i += 1
    if start < n:
        spans.append((start, n))
    return spans


def _trim_span(text: str, start: int, end: int) -> tuple[int, int]:
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    return start, end


def word_count(text: str) -> int:
    """Whitespace tokens that contain at least one alphabetic character."""
    return sum(1 for tok in text.split() if any(c.isalpha() for c in tok))


def split_sentences(normalized: str) -> list[tuple[int, int]]:
    """Trimmed char spans of sentences that survive the minimum-word filter."""
    kept: list[tuple[int, int]] = []
    for raw_start, raw_end in _raw_sentence_spans(normalized):
        start, end = _trim_span(normalized, raw_start, raw_end)
        if start == end:
            continue
        if word_count(normalized[start:end]) >= MIN_WORDS:
            kept.append((start, end))
    return kept


def segment_transcript(
    raw_text: str,
    transcript_id: str,
    defendant_aliases: list[str] | tuple[str, ...] = (),
    source_meta: dict | None = None,
) -> Transcript:
    """Normalize raw text and segment it into indexed sentences.

    Empty input yields an empty transcript. An empty alias list is allowed
    here (flagged downstream where defendant gating actually needs it).
    """
    aliases = tuple(a for a in defendant_aliases if a.strip())
    if len(aliases) != len(tuple(defendant_aliases)):
        raise IngestionError("defendant aliases must be non-empty strings")
    normalized = normalize_text(raw_text)
    sentences = tuple(
        Sentence(index=i, text=normalized[start:end], char_span=(start, end))
        for i, (start, end) in enumerate(split_sentences(normalized))
    )
    return Transcript(
        transcript_id=transcript_id,
        defendant_aliases=aliases,
        sentences=sentences,
        source_meta=dict(source_meta or {}),
    )


def read_raw_text(path: Path | str) -> str:
    """Decode a raw transcript file as UTF-8, naming the byte offset on failure."""
    data = Path(path).read_bytes()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise IngestionError(f"{path}: undecodable UTF-8 at byte offset {exc.start}") from exc


def _transcript_path(corpus_dir: Path | str, transcript_id: str) -> Path:
    if not _SAFE_ID_RE.match(transcript_id):
        raise IngestionError(f"transcript id {transcript_id!r} is not filename-safe")
    return Path(corpus_dir) / f"{transcript_id}.jsonl"


def store_transcript(t: Transcript, corpus_dir: Path | str) -> Path:
    path = _transcript_path(corpus_dir, t.transcript_id)
    header = {
        "schema_version": SCHEMA_VERSION,
        "transcript_id": t.transcript_id,
        "defendant_aliases": list(t.defendant_aliases),
        "source_meta": t.source_meta,
    }
    rows = [header] + [
        {"index": s.index, "text": s.text, "char_span": list(s.char_span)} for s in t.sentences
    ]
    write_records(path, rows)
    return path


def load_transcript(corpus_dir: Path | str, transcript_id: str) -> Transcript:
    path = _transcript_path(corpus_dir, transcript_id)
    if not path.exists():
        raise TranscriptNotFoundError(f"no transcript {transcript_id!r} in {corpus_dir}")
    rows = iter(read_records(path))
    try:
        header = next(rows)
    except StopIteration:
        raise SchemaVersionError(f"{path}: empty transcript file") from None
    version = header.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(f"{path}: schema version {version!r}, expected {SCHEMA_VERSION}")
    sentences = tuple(
        Sentence(index=row["index"], text=row["text"], char_span=tuple(row["char_span"]))
        for row in rows
    )
    return Transcript(
        transcript_id=header["transcript_id"],
        defendant_aliases=tuple(header["defendant_aliases"]),
        sentences=sentences,
        source_meta=dict(header.get("source_meta", {})),
    )


def list_transcript_ids(corpus_dir: Path | str) -> list[str]:
    return sorted(p.stem for p in Path(corpus_dir).glob("*.jsonl"))


def load_corpus(corpus_dir: Path | str) -> dict[str, Transcript]:
    return {tid: load_transcript(corpus_dir, tid) for tid in list_transcript_ids(corpus_dir)}
