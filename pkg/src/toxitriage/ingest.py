"""Message intake: normalization, pseudonymization, trends, queries, replay.

Live platform fetching is abstracted behind a message source: either a JSON
Lines file replay or an in-process synthetic generator. Author handles are
replaced with a keyed one-way hash the moment a message is normalized; the
raw handle is never stored or logged downstream. The pseudonymization key
comes from the environment (``TOXITRIAGE_KEY``), never from config files.

Replay drives a simulated clock from message timestamps, so a desk-scale run
reproduces the two-minute pool maintenance cadence without wall-clock waits.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Iterator

from .lexicon import Lexicon, load_stopwords, tokenize

KEY_ENV_VAR = "TOXITRIAGE_KEY"

MAINTENANCE_INTERVAL = timedelta(minutes=2)


class ConfigurationError(RuntimeError):
    pass


@dataclass(frozen=True)
class RawMessage:
    """Wire shape of a fetched post, before any privacy processing."""
    source_id: str
    text: str
    language: str
    timestamp: str
    author: str
    reply_to: str | None = None

    @classmethod
    def from_dict(cls, doc: dict) -> "RawMessage":
        return cls(
            source_id=str(doc["id"]),
            text=doc.get("text", ""),
            language=str(doc.get("lang", "")),
            timestamp=str(doc.get("ts", "")),
            author=str(doc.get("author", "")),
            reply_to=doc.get("reply_to"),
        )


@dataclass(frozen=True)
class Message:
    """Normalized, pseudonymized message. Contains no raw author handle."""
    id: str
    text: str
    language: str
    timestamp: datetime
    author_pseudonym: str
    reply_to: str | None = None

    def to_dict(self) -> dict:
        doc = {
            "id": self.id,
            "text": self.text,
            "lang": self.language,
            "ts": self.timestamp.isoformat(),
            "author": self.author_pseudonym,
        }
        if self.reply_to is not None:
            doc["reply_to"] = self.reply_to
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "Message":
        return cls(doc["id"], doc["text"], doc["lang"],
                   datetime.fromisoformat(doc["ts"]), doc["author"],
                   doc.get("reply_to"))


def pseudonymize(handle: str, key: str) -> str:
    """Keyed one-way hash of an author handle, 32 hex chars.

    Deterministic per (handle, key); different keys give unrelated values.
    """
    if not key:
        raise ConfigurationError("pseudonymization key must be non-empty")
    digest = hashlib.blake2b(handle.encode("utf-8"),
                             key=key.encode("utf-8")[:64],
                             digest_size=16)
    return digest.hexdigest()


def message_id(source_id: str) -> str:
    """Content-stable message identifier derived from the source id."""
    return hashlib.blake2b(source_id.encode("utf-8"), digest_size=16).hexdigest()


def pseudonym_key_from_env() -> str:
    key = os.environ.get(KEY_ENV_VAR, "")
    if not key:
        raise ConfigurationError(
            f"set {KEY_ENV_VAR} to a non-empty secret before ingesting")
    return key


class RejectedMessage(ValueError):
    """A raw message failed normalization; counted, not fatal."""


def _parse_timestamp(value: str) -> datetime:
    try:
        ts = datetime.fromisoformat(value.replace("Z", "+00:00"))
    except ValueError:
        raise RejectedMessage(f"unparseable timestamp {value!r}") from None
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


def normalize(raw: RawMessage, key: str) -> Message:
    """Validate and pseudonymize one raw message."""
    if not raw.text.strip():
        raise RejectedMessage("empty text")
    ts = _parse_timestamp(raw.timestamp)
    return Message(
        id=message_id(raw.source_id),
        text=raw.text,
        language=raw.language.lower(),
        timestamp=ts,
        author_pseudonym=pseudonymize(raw.author, key),
        reply_to=raw.reply_to,
    )


# -- trending topics ------------------------------------------------------

@dataclass(frozen=True)
class TrendTopic:
    term: str
    weight: int
    valid_until: datetime


DEFAULT_TREND_TTL = timedelta(hours=24)


def extract_trends(headlines: Iterable[str], language: str, k: int,
                   now: datetime | None = None,
                   stopwords: frozenset[str] | None = None) -> list[TrendTopic]:
    """Top-k most frequent headline terms, skipping function words.

    Ties resolve by first appearance, so the k-sized result is always a
    prefix of the (k+1)-sized one.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if stopwords is None:
        stopwords = load_stopwords(language)
    if now is None:
        now = datetime.now(timezone.utc)
    counts: dict[str, int] = {}
    first_seen: dict[str, int] = {}
    position = 0
    for headline in headlines:
        for token in tokenize(headline):
            if len(token) < 3 or token in stopwords:
                continue
            if token not in counts:
                counts[token] = 0
                first_seen[token] = position
                position += 1
            counts[token] += 1
    ranked = sorted(counts, key=lambda t: (-counts[t], first_seen[t]))
    valid_until = now + DEFAULT_TREND_TTL
    return [TrendTopic(t, counts[t], valid_until) for t in ranked[:k]]


# -- search queries -------------------------------------------------------

class QueryMode(Enum):
    KEYWORDS_ONLY = "KEYWORDS_ONLY"
    TREND_COMBINED = "TREND_COMBINED"


@dataclass(frozen=True)
class Query:
    terms: tuple[str, ...]
    language: str
    mode: QueryMode
    minute: int

    def __post_init__(self):
        if not 1 <= len(self.terms) <= 2:
            raise ValueError("a query carries 1 or 2 terms")


@dataclass(frozen=True)
class QueryBudget:
    max_per_minute: int = 3

    def __post_init__(self):
        if self.max_per_minute <= 0:
            raise ValueError("budget must be positive")


def compose_queries(keywords: list[str], trends: list[TrendTopic],
                    budget: QueryBudget, mode: QueryMode, minute: int,
                    language: str = "") -> list[Query]:
    """Emit at most ``budget.max_per_minute`` queries for one minute slot.

    KEYWORDS_ONLY cycles the keyword list round-robin across minutes.
    TREND_COMBINED pairs each trend (by descending weight) with each keyword,
    cycling the pair list the same way; with no live trends it degrades to
    KEYWORDS_ONLY.
    """
    limit = budget.max_per_minute
    if mode is QueryMode.TREND_COMBINED and trends:
        ordered = sorted(trends, key=lambda t: (-t.weight, t.term))
        pairs = [(t.term, kw) for t in ordered for kw in keywords]
        if not pairs:
            return []
        start = (minute * limit) % len(pairs)
        chosen = [pairs[(start + i) % len(pairs)]
                  for i in range(min(limit, len(pairs)))]
        return [Query((a, b), language, QueryMode.TREND_COMBINED, minute)
                for a, b in chosen]
    if not keywords:
        return []
    start = (minute * limit) % len(keywords)
    chosen_kw = [keywords[(start + i) % len(keywords)]
                 for i in range(min(limit, len(keywords)))]
    return [Query((kw,), language, QueryMode.KEYWORDS_ONLY, minute)
            for kw in chosen_kw]


# -- corpus replay --------------------------------------------------------

@dataclass
class IngestStats:
    seen: int = 0
    toxic: int = 0
    offered: int = 0
    accepted: int = 0
    rejected_malformed: int = 0

    def to_dict(self) -> dict:
        return {
            "seen": self.seen,
            "toxic": self.toxic,
            "offered": self.offered,
            "accepted": self.accepted,
            "rejected_malformed": self.rejected_malformed,
        }


def iter_jsonl(path: str | Path) -> Iterator[RawMessage | None]:
    """Yield RawMessage per line; ``None`` marks a malformed line."""
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                yield RawMessage.from_dict(doc)
            except (json.JSONDecodeError, KeyError, TypeError):
                yield None


def replay_corpus(source: str | Path | Iterable[RawMessage | None],
                  lexicon: Lexicon, pool, key: str | None = None,
                  on_message: Callable | None = None) -> IngestStats:
    """Run a corpus through assess-and-offer, with simulated-time maintenance.

    Messages with score > 0 are offered to the pool; the pool's expiry
    maintenance runs every 2 simulated minutes, driven by message
    timestamps. Deterministic for a fixed (corpus, lexicon, key).
    """
    from .pool import PoolEntry  # local imports avoid a cycle at module load
    from .scoring import assess

    if key is None:
        key = pseudonym_key_from_env()
    if isinstance(source, (str, Path)):
        source = iter_jsonl(source)
    stats = IngestStats()
    last_maintenance: datetime | None = None
    for raw in source:
        if raw is None:
            stats.rejected_malformed += 1
            continue
        try:
            message = normalize(raw, key)
        except RejectedMessage:
            stats.rejected_malformed += 1
            continue
        stats.seen += 1
        now = message.timestamp
        if last_maintenance is None:
            last_maintenance = now
        elif now - last_maintenance >= MAINTENANCE_INTERVAL:
            pool.evict_expired(now)
            last_maintenance = now
        assessment = assess(message.text, lexicon, message.id,
                            message.timestamp)
        if assessment.score <= 0:
            continue
        stats.toxic += 1
        if on_message is not None:
            on_message(message, assessment)
        stats.offered += 1
        if pool.offer(PoolEntry(message, assessment, now), now):
            stats.accepted += 1
    return stats
