"""Counternarrative building blocks: meme catalog, columnar grammars,
engagement-ranked suggestions, and response assembly.

A grammar is a list of columns, each a list of variant strings; the cross
product of the columns is the full set of counternarrative texts it can
produce. Expansion is a bijection from [0, product of column sizes) onto
that set via mixed-radix decoding, so previews and suggestions are fully
deterministic. An empty-string variant makes a column skippable.

Grammar ranking uses add-1/add-2 smoothed like rates, so an unused grammar
starts at 0.5 and gets exploratory exposure until real engagement data
accumulates.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Iterable

MEME_STYLES = ("RIDICULING", "REPROACHING", "RECONCILING")
CAPTION_LANGUAGES = ("en", "de", "fr", "nl", "hu")

#: Which grammar tones may answer which toxicity labels. Config-overridable.
DEFAULT_TONE_COMPATIBILITY = {
    "PROFANITY": {"defensive", "humorous", "reconciling"},
    "RIDICULE": {"defensive", "humorous", "reconciling"},
    "RACISM": {"defensive", "reconciling"},
    "SEXISM": {"defensive", "reconciling"},
    "THREAT": {"defensive"},
    "CONSPIRACY": {"defensive", "reconciling"},
}


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class Meme:
    id: str
    style: str
    captions: dict[str, str]
    image: str

    def __post_init__(self):
        if self.style not in MEME_STYLES:
            raise CatalogError(f"meme {self.id!r}: unknown style {self.style!r}")
        if not self.captions:
            raise CatalogError(f"meme {self.id!r}: needs at least one caption")


def load_memes(source: str | Path) -> list[Meme]:
    """Load and validate the meme catalog (JSON array)."""
    docs = json.loads(Path(source).read_text(encoding="utf-8"))
    return parse_memes(docs)


def parse_memes(docs: list[dict]) -> list[Meme]:
    memes = []
    seen = set()
    for i, doc in enumerate(docs):
        mid = doc.get("id")
        if not mid:
            raise CatalogError(f"meme #{i}: missing id")
        if mid in seen:
            raise CatalogError(f"duplicate meme id {mid!r}")
        seen.add(mid)
        memes.append(Meme(mid, doc.get("style", ""),
                          dict(doc.get("captions", {})),
                          doc.get("image", "")))
    return memes


@dataclass(frozen=True)
class Grammar:
    id: str
    language: str
    tone: str
    columns: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if not self.columns:
            raise CatalogError(f"grammar {self.id!r}: needs at least one column")
        for i, col in enumerate(self.columns):
            if not col:
                raise CatalogError(f"grammar {self.id!r}: column {i} is empty")


_PLACEHOLDER = re.compile(r"@\w+")


def parse_grammar(doc: dict) -> Grammar:
    """Build a Grammar from its JSON document.

    Two authoring forms are accepted: explicit ``columns: [[variant...]...]``,
    or a ``template`` string whose ``@placeholder`` tokens are replaced by
    columns drawn from a ``placeholders`` map.
    """
    gid = doc.get("id", "")
    lang = str(doc.get("lang", "")).lower()
    tone = str(doc.get("tone", "")).lower()
    if "columns" in doc:
        columns = tuple(tuple(str(v) for v in col) for col in doc["columns"])
    elif "template" in doc:
        replacements = {k.lstrip("@"): v
                        for k, v in doc.get("placeholders", {}).items()}
        columns = []
        for token in str(doc["template"]).split():
            if token.startswith("@") and token.lstrip("@") in replacements:
                columns.append(tuple(str(v) for v in replacements[token.lstrip("@")]))
            else:
                columns.append((token,))
        columns = tuple(columns)
    else:
        raise CatalogError(f"grammar {gid!r}: needs 'columns' or 'template'")
    return Grammar(gid, lang, tone, columns)


def load_grammar(source: str | Path) -> Grammar:
    return parse_grammar(json.loads(Path(source).read_text(encoding="utf-8")))


def expansion_count(grammar: Grammar) -> int:
    return math.prod(len(col) for col in grammar.columns)


def _polish(text: str) -> str:
    """Normalize a joined expansion: spacing, sentence capitalization."""
    text = re.sub(r"\s+", " ", text).strip()
    text = re.sub(r"\s+([.!?,])", r"\1", text)
    chars = list(text)
    capitalize_next = True
    for i, ch in enumerate(chars):
        if capitalize_next and ch.isalpha():
            chars[i] = ch.upper()
            capitalize_next = False
        elif ch in ".!?":
            capitalize_next = True
    return "".join(chars)


def expand(grammar: Grammar, index: int) -> str:
    """Render expansion ``index``: mixed-radix pick of one variant per column.

    The leftmost column is the most significant digit, so index 0 joins the
    first variant of every column. Bijective onto the expansion set when
    variants are distinct within each column.
    """
    count = expansion_count(grammar)
    if not 0 <= index < count:
        raise IndexError(f"expansion index {index} out of range [0, {count})")
    picks = []
    remainder = index
    for col in reversed(grammar.columns):
        remainder, digit = divmod(remainder, len(col))
        picks.append(col[digit])
    picks.reverse()
    return _polish(" ".join(p for p in picks if p))


def expand_all(grammar: Grammar) -> list[str]:
    return [expand(grammar, i) for i in range(expansion_count(grammar))]


@dataclass(frozen=True)
class GrammarStats:
    posts: int
    liked_posts: int


def rank_score(stats: GrammarStats) -> Fraction:
    """Smoothed like rate in (0, 1): (liked + 1) / (posts + 2)."""
    return Fraction(stats.liked_posts + 1, stats.posts + 2)


def rank_grammars(grammars: Iterable[Grammar],
                  stats: dict[str, GrammarStats]) -> list[tuple[Grammar, Fraction]]:
    """Order grammars by smoothed engagement, best first; ties by id."""
    empty = GrammarStats(0, 0)
    scored = [(g, rank_score(stats.get(g.id, empty))) for g in grammars]
    scored.sort(key=lambda pair: (-pair[1], pair[0].id))
    return scored


@dataclass(frozen=True)
class Suggestion:
    grammar_id: str
    text: str
    rank: Fraction


def _seeded_index(message_id: str, grammar_id: str, count: int) -> int:
    digest = hashlib.blake2b(f"{message_id}:{grammar_id}".encode("utf-8"),
                             digest_size=8).digest()
    return int.from_bytes(digest, "big") % count


def suggest(message, assessment, grammars: Iterable[Grammar],
            stats: dict[str, GrammarStats], n: int,
            tone_compatibility: dict[str, set[str]] | None = None) -> list[Suggestion]:
    """Top-n counternarrative suggestions for one message.

    Grammars are filtered to the message language and to tones compatible
    with every assessed label, then ranked by engagement. Each grammar
    contributes one expansion seeded by the message id, so repeated calls
    for the same message are identical.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if tone_compatibility is None:
        tone_compatibility = DEFAULT_TONE_COMPATIBILITY
    allowed_tones = None
    for label in assessment.labels:
        tones = set(tone_compatibility.get(label, set()))
        allowed_tones = tones if allowed_tones is None else allowed_tones & tones
    candidates = [g for g in grammars
                  if g.language == message.language
                  and (allowed_tones is None or g.tone in allowed_tones)]
    out = []
    for grammar, score in rank_grammars(candidates, stats)[:n]:
        index = _seeded_index(message.id, grammar.id, expansion_count(grammar))
        out.append(Suggestion(grammar.id, expand(grammar, index), score))
    return out


# -- response assembly ----------------------------------------------------

class TextSource:
    NONE = "none"
    HUMAN = "human"
    GENERATED = "generated"  # grammar output, untouched
    EDITED = "edited"        # grammar output with human edits


RESPONSE_KINDS = ("HUMAN", "GENERATED", "HYBRID")


@dataclass(frozen=True)
class Response:
    id: str
    target_id: str
    meme_id: str | None
    text: str | None
    text_source: str
    kind: str
    posted_at: datetime
    account: str

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "target_id": self.target_id,
            "meme_id": self.meme_id,
            "text": self.text,
            "text_source": self.text_source,
            "kind": self.kind,
            "posted_at": self.posted_at.isoformat(),
            "account": self.account,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Response":
        return cls(doc["id"], doc["target_id"], doc.get("meme_id"),
                   doc.get("text"), doc["text_source"], doc["kind"],
                   datetime.fromisoformat(doc["posted_at"]), doc["account"])


class ResponseError(ValueError):
    pass


def response_kind(has_meme: bool, text_source: str) -> str:
    """Provenance -> kind: pure grammar text is GENERATED, grammar text with
    edits or mixed with a meme is HYBRID, everything else is HUMAN."""
    if text_source == TextSource.GENERATED:
        return "HYBRID" if has_meme else "GENERATED"
    if text_source == TextSource.EDITED:
        return "HYBRID"
    return "HUMAN"


def compose_response(response_id: str, target_id: str, *,
                     meme: Meme | None = None, text: str | None = None,
                     text_source: str = TextSource.NONE,
                     posted_at: datetime | None = None,
                     account: str = "@trollfeeders") -> Response:
    """Assemble a response; at least one of meme / text must be present."""
    if meme is None and not text:
        raise ResponseError("a response needs a meme, a text, or both")
    if text and text_source == TextSource.NONE:
        text_source = TextSource.HUMAN
    if not text:
        text_source = TextSource.NONE
    if posted_at is None:
        posted_at = datetime.now(timezone.utc)
    return Response(
        id=response_id,
        target_id=target_id,
        meme_id=meme.id if meme else None,
        text=text or None,
        text_source=text_source,
        kind=response_kind(meme is not None, text_source),
        posted_at=posted_at,
        account=account,
    )
