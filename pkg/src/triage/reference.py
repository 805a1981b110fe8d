"""Is a sentence about the defendant? Rule-based resolution over short context.

Three rules, applied in order with first match winning: a direct alias
mention in the target sentence; a she/her pronoun whose nearest preceding
feminine referent is a defendant alias; and a she/her pronoun in a context
containing no feminine name at all (a pronoun-only chain defaults to the
defendant). An HTTP client lets an external resolver replace the rules.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Collection, Mapping, Protocol, Sequence

import httpx

from .corpus import Transcript
from .errors import ConfigurationError, ResolverTransportError
from .pipeline import PipelineConfig
from .textmatch import compile_phrase

PRONOUN_RE = re.compile(r"(?<![a-z])(she|hers|herself|her)(?![a-z])", re.IGNORECASE)


class ReferenceRule(str, enum.Enum):
    DIRECT_ALIAS = "direct_alias"
    PRONOUN_CHAIN = "pronoun_chain"
    SHE_HER_ONLY_CLUSTER = "she_her_only_cluster"
    NONE = "none"


@dataclass(frozen=True)
class ReferenceQuery:
    """Target sentence (last) plus up to context_back preceding sentences."""

    context_sentences: tuple[str, ...]
    target_index_in_context: int
    defendant_aliases: tuple[str, ...]


@dataclass(frozen=True)
class ReferenceVerdict:
    mentions_defendant: bool
    rule_fired: ReferenceRule
    evidence: tuple = ()  # (sentence offset in context, (char start, char end))


class Resolver(Protocol):
    def resolve(self, query: ReferenceQuery) -> ReferenceVerdict:
        ...


def load_name_list(path: Path | str) -> frozenset:
    """Feminine-name list file: one lowercase name per line."""
    names = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        name = line.strip().lower()
        if name and not name.startswith("#"):
            names.add(name)
    return frozenset(names)


@dataclass(frozen=True)
class _Referent:
    span: tuple[int, int]
    is_alias: bool


def _referent_spans(text: str, aliases: Sequence[str], names: Collection[str]) -> list[_Referent]:
    """Alias and name-list matches in one sentence, alias matches winning overlaps."""
    found: list[_Referent] = []
    for alias in sorted(aliases, key=len, reverse=True):
        for match in compile_phrase(alias).finditer(text):
            span = match.span()
            if not any(_overlaps(span, r.span) for r in found):
                found.append(_Referent(span, True))
    for name in names:
        for match in compile_phrase(name).finditer(text):
            span = match.span()
            if not any(_overlaps(span, r.span) for r in found):
                found.append(_Referent(span, False))
    return sorted(found, key=lambda r: r.span)


def _overlaps(a: tuple[int, int], b: tuple[int, int]) -> bool:
    return a[0] < b[1] and b[0] < a[1]


class BuiltinResolver:
    """The deterministic rule set, with a configurable feminine-name list."""

    def __init__(self, feminine_names: Collection[str] = ()):
        self.feminine_names = frozenset(n.lower() for n in feminine_names)

    @classmethod
    def from_name_file(cls, path: Path | str) -> "BuiltinResolver":
        return cls(load_name_list(path))

    def resolve(self, query: ReferenceQuery) -> ReferenceVerdict:
        if not query.defendant_aliases:
            raise ConfigurationError("defendant alias list is empty")
        if not query.context_sentences:
            raise ConfigurationError("reference query has no context sentences")
        target_idx = query.target_index_in_context
        target = query.context_sentences[target_idx]

        # Rule 1: the target sentence names the defendant directly.
        for alias in query.defendant_aliases:
            match = compile_phrase(alias).search(target)
            if match:
                return ReferenceVerdict(True, ReferenceRule.DIRECT_ALIAS, ((target_idx, match.span()),))

        pronoun = PRONOUN_RE.search(target)
        if pronoun is None:
            return ReferenceVerdict(False, ReferenceRule.NONE)

        # Rule 2: nearest feminine referent scanning backward from the pronoun.
        nearest = self._nearest_referent(query, pronoun.start())
        if nearest is not None:
            offset, referent = nearest
            if referent.is_alias:
                return ReferenceVerdict(
                    True,
                    ReferenceRule.PRONOUN_CHAIN,
                    ((target_idx, pronoun.span()), (offset, referent.span)),
                )
            return ReferenceVerdict(False, ReferenceRule.NONE)

        # Rule 3: pronoun with no feminine name anywhere in context.
        if self._context_has_feminine_name(query):
            return ReferenceVerdict(False, ReferenceRule.NONE)
        return ReferenceVerdict(
            True, ReferenceRule.SHE_HER_ONLY_CLUSTER, ((target_idx, pronoun.span()),)
        )

    def _nearest_referent(
        self, query: ReferenceQuery, pronoun_start: int
    ) -> tuple[int, _Referent] | None:
        target_idx = query.target_index_in_context
        target = query.context_sentences[target_idx]
        in_target = [
            r
            for r in _referent_spans(target, query.defendant_aliases, self.feminine_names)
            if r.span[1] <= pronoun_start
        ]
        if in_target:
            return target_idx, in_target[-1]
        for offset in range(target_idx - 1, -1, -1):
            referents = _referent_spans(
                query.context_sentences[offset], query.defendant_aliases, self.feminine_names
            )
            if referents:
                return offset, referents[-1]
        return None

    def _context_has_feminine_name(self, query: ReferenceQuery) -> bool:
        return any(
            _referent_spans(sentence, query.defendant_aliases, self.feminine_names)
            for sentence in query.context_sentences
        )


def resolve_reference(query: ReferenceQuery, feminine_names: Collection[str] = ()) -> ReferenceVerdict:
    """Apply the built-in rules to one query; first matching rule wins."""
    return BuiltinResolver(feminine_names).resolve(query)


class HttpResolver:
    """Client for the POST /resolve wire protocol."""

    def __init__(self, base_url: str, client: httpx.Client | None = None):
        self.base_url = base_url.rstrip("/")
        self._client = client or httpx.Client(timeout=30.0)

    def resolve(self, query: ReferenceQuery) -> ReferenceVerdict:
        body = {
            "context_sentences": list(query.context_sentences),
            "target_index": query.target_index_in_context,
            "defendant_aliases": list(query.defendant_aliases),
        }
        try:
            response = self._client.post(f"{self.base_url}/resolve", json=body)
        except httpx.HTTPError as exc:
            raise ResolverTransportError(f"resolver unreachable: {exc}") from exc
        if response.status_code < 200 or response.status_code >= 300:
            raise ResolverTransportError(f"resolver returned HTTP {response.status_code}")
        try:
            payload = response.json()
            mentions = bool(payload["mentions_defendant"])
            rule = ReferenceRule(payload.get("rule", "none"))
        except (ValueError, KeyError, TypeError) as exc:
            raise ResolverTransportError(f"malformed resolver response: {exc}") from exc
        return ReferenceVerdict(mentions, rule)


def make_resolver(spec: str, name_file: Path | str | None = None) -> Resolver:
    """Build a resolver from a CLI spec: "builtin" or "http:<url>"."""
    if spec == "builtin":
        return BuiltinResolver.from_name_file(name_file) if name_file else BuiltinResolver()
    if spec.startswith("http:"):
        url = spec.split(":", 1)[1]
        if not url.startswith(("http://", "https://")):
            url = "http://" + url.lstrip("/")
        return HttpResolver(url)
    raise ValueError(f"unknown resolver spec {spec!r} (expected builtin or http:<url>)")


@dataclass(frozen=True)
class GateFlag:
    """Checked-vs-unchecked is recorded distinctly from the verdict itself."""

    checked: bool
    mentions_defendant: bool
    rule_fired: ReferenceRule | None = None


UNCHECKED_FLAG = GateFlag(checked=False, mentions_defendant=False)


def build_query(t: Transcript, sentence_index: int, cfg: PipelineConfig) -> ReferenceQuery:
    lo = max(0, sentence_index - cfg.context_back)
    context = tuple(s.text for s in t.sentences[lo : sentence_index + 1])
    return ReferenceQuery(
        context_sentences=context,
        target_index_in_context=len(context) - 1,
        defendant_aliases=t.defendant_aliases,
    )


def gate_sentences(
    t: Transcript,
    sentence_scores: Mapping[int, float],
    cfg: PipelineConfig,
    resolver: Resolver,
) -> dict[int, GateFlag]:
    """Run the resolver on exactly the sentences scored above the gate threshold.

    Every other sentence carries an unchecked flag (false by default), kept
    distinct from a checked-and-negative verdict. On a transport failure the
    error names the sentence that failed plus the ones still unresolved.
    """
    if not t.defendant_aliases:
        raise ConfigurationError(f"transcript {t.transcript_id!r} has no defendant aliases")
    flags: dict[int, GateFlag] = {}
    to_check = [i for i in sorted(sentence_scores) if sentence_scores[i] > cfg.gate_threshold]
    for i in sorted(sentence_scores):
        flags[i] = UNCHECKED_FLAG
    for pos, i in enumerate(to_check):
        try:
            verdict = resolver.resolve(build_query(t, i, cfg))
        except ResolverTransportError as exc:
            raise ResolverTransportError(str(exc), sentence_ids=tuple(to_check[pos:])) from exc
        flags[i] = GateFlag(checked=True, mentions_defendant=verdict.mentions_defendant,
                            rule_fired=verdict.rule_fired)
    return flags


def flags_to_bools(flags: Mapping[int, GateFlag]) -> dict[int, bool]:
    return {i: f.mentions_defendant for i, f in flags.items()}
