"""Turn match spans into a toxicity score, a label set, and a total order.

Score is the plain sum of matched entry weights, multiplied by a bonus
factor when the labels combine THREAT with a discrimination label (RACISM
or SEXISM). Raw sums are deliberately not normalized: the pool only needs
a total order, and sums stay explainable span-by-span.

Ranking ties are broken deterministically (more labels, newer message,
smaller id) so pool contents are reproducible across runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from functools import total_ordering

from .lexicon import Lexicon, MatchSpan, scan

#: Multiplier applied when THREAT co-occurs with a discrimination label.
SEVERITY_BONUS = 1.5
BONUS_TRIGGER = "THREAT"
BONUS_PARTNERS = frozenset({"RACISM", "SEXISM"})

_EPOCH = datetime.fromtimestamp(0, tz=timezone.utc)


@dataclass(frozen=True)
class Assessment:
    """Toxicity verdict for one message.

    score = 0 exactly when there are no matches; labels are the union of the
    matched entries' labels.
    """
    message_id: str
    score: float
    labels: frozenset[str]
    matches: tuple[MatchSpan, ...]
    timestamp: datetime = _EPOCH


def assess(text: str, lexicon: Lexicon, message_id: str = "",
           timestamp: datetime = _EPOCH,
           bonus: float = SEVERITY_BONUS) -> Assessment:
    """Scan ``text`` and aggregate the matches into an Assessment."""
    matches = tuple(scan(text, lexicon))
    labels: set[str] = set()
    base = 0
    for span in matches:
        entry = lexicon.entry(span.entry_id)
        base += entry.weight
        labels |= entry.labels
    score = float(base)
    if BONUS_TRIGGER in labels and labels & BONUS_PARTNERS:
        score *= bonus
    return Assessment(message_id, score, frozenset(labels), matches, timestamp)


@total_ordering
class _ReversedStr:
    """String wrapper whose ordering is inverted (for descending-only keys)."""
    __slots__ = ("value",)

    def __init__(self, value: str):
        self.value = value

    def __eq__(self, other):
        return self.value == other.value

    def __lt__(self, other):
        return self.value > other.value


def rank_key(a: Assessment):
    """Sort key: ascending sort puts the worst (highest-ranked) message first.

    Order: higher score, then more labels, then newer timestamp, then
    message id ascending. A strict total order for distinct message ids.
    """
    return (-a.score, -len(a.labels), -a.timestamp.timestamp(),
            a.message_id)


def goodness_key(a: Assessment):
    """Inverse of :func:`rank_key`: bigger tuple = more toxic. Heap-friendly."""
    return (a.score, len(a.labels), a.timestamp.timestamp(),
            _ReversedStr(a.message_id))


def compare(a: Assessment, b: Assessment) -> int:
    """-1 if ``a`` outranks ``b`` (displayed first), 1 if ``b`` wins, 0 if equal."""
    ka, kb = rank_key(a), rank_key(b)
    if ka < kb:
        return -1
    if ka > kb:
        return 1
    return 0
