"""Whole-word phrase matching shared by the lexicon scorer and reference rules."""

from __future__ import annotations

import re
from functools import lru_cache


@lru_cache(maxsize=4096)
def compile_phrase(phrase: str) -> re.Pattern:
    """Case-insensitive matcher for `phrase` bounded by non-alphanumerics.

    Multi-word phrases tolerate any whitespace run between words, so the
    alias "ms. smith" still matches across a line break.
    """
    parts = [re.escape(p) for p in phrase.split()]
    if not parts:
        raise ValueError("empty phrase")
    body = r"\s+".join(parts)
    return re.compile(rf"(?<![a-z0-9]){body}(?![a-z0-9])", re.IGNORECASE)


def find_phrase_spans(text: str, phrase: str) -> list[tuple[int, int]]:
    return [m.span() for m in compile_phrase(phrase).finditer(text)]


def count_phrase(text: str, phrase: str) -> int:
    return len(find_phrase_spans(text, phrase))
