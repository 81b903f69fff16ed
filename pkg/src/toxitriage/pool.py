"""Per-language bounded pool of the most toxic recent messages.

Capacity defaults to 2000 entries and the recency window to 48 hours: newer,
more toxic messages replace older, less toxic ones, and anything older than
the window is dropped at maintenance time. A message can only be present
once; messages a moderator acts on leave the pool through ``remove``.

Internally a dict (id -> entry) is paired with a lazily-cleaned min-heap on
the ranking key, giving O(log capacity) offers. ``top`` never mutates.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass
from datetime import datetime, timedelta
from .ingest import Message
from .lexicon import MatchSpan
from .scoring import Assessment, goodness_key, rank_key

DEFAULT_CAPACITY = 2000
DEFAULT_WINDOW = timedelta(hours=48)

SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class PoolEntry:
    message: Message
    assessment: Assessment
    inserted_at: datetime

    def __post_init__(self):
        if self.message.id != self.assessment.message_id:
            raise ValueError("assessment does not belong to this message")


class RankedPool:
    def __init__(self, language: str, capacity: int = DEFAULT_CAPACITY,
                 window: timedelta = DEFAULT_WINDOW):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.language = language.lower()
        self.capacity = capacity
        self.window = window
        self._entries: dict[str, PoolEntry] = {}
        # (goodness_key, message id, seq); worst live entry on top. seq
        # distinguishes re-offers of an id that was evicted earlier.
        self._heap: list = []
        self._seq: dict[str, int] = {}
        self._next_seq = 0

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, message_id: str) -> bool:
        return message_id in self._entries

    def get(self, message_id: str) -> PoolEntry | None:
        return self._entries.get(message_id)

    def _worst(self) -> str:
        """Message id of the lowest-ranked live entry; heap is cleaned as we go."""
        while self._heap:
            _, mid, seq = self._heap[0]
            if self._seq.get(mid) == seq:
                return mid
            heapq.heappop(self._heap)
        raise LookupError("pool is empty")

    def _insert(self, entry: PoolEntry) -> None:
        mid = entry.message.id
        self._entries[mid] = entry
        self._seq[mid] = self._next_seq
        heapq.heappush(self._heap,
                       (goodness_key(entry.assessment), mid, self._next_seq))
        self._next_seq += 1

    def _drop(self, mid: str) -> None:
        del self._entries[mid]
        del self._seq[mid]

    def offer(self, entry: PoolEntry, now: datetime) -> bool:
        """Try to insert; returns whether the entry made it in.

        Rejected when the message is outside the recency window, already
        present, or (at capacity) does not outrank the current minimum.
        """
        if entry.message.timestamp < now - self.window:
            return False
        mid = entry.message.id
        if mid in self._entries:
            return False
        if len(self._entries) >= self.capacity:
            worst_id = self._worst()
            worst = self._entries[worst_id]
            if goodness_key(entry.assessment) <= goodness_key(worst.assessment):
                return False
            heapq.heappop(self._heap)
            self._drop(worst_id)
        self._insert(entry)
        return True

    def evict_expired(self, now: datetime) -> int:
        """Drop every entry older than the window; returns how many."""
        cutoff = now - self.window
        stale = [mid for mid, e in self._entries.items()
                 if e.message.timestamp < cutoff]
        for mid in stale:
            self._drop(mid)
        return len(stale)

    def remove(self, message_id: str) -> bool:
        """Explicit removal, used when a moderator acts on a message."""
        if message_id not in self._entries:
            return False
        self._drop(message_id)
        return True

    def top(self, n: int) -> list[PoolEntry]:
        """Best-first prefix of the pool; read-only."""
        if n < 0:
            raise ValueError("n must be >= 0")
        ranked = sorted(self._entries.values(),
                        key=lambda e: rank_key(e.assessment))
        return ranked[:n]

    def entries(self) -> list[PoolEntry]:
        return list(self._entries.values())

    # -- persistence ------------------------------------------------------

    def snapshot(self) -> dict:
        """JSON-serializable snapshot of the whole pool, versioned."""
        return {
            "version": SNAPSHOT_VERSION,
            "language": self.language,
            "capacity": self.capacity,
            "window_seconds": int(self.window.total_seconds()),
            "entries": [
                {
                    "message": self._entries[mid].message.to_dict(),
                    "score": self._entries[mid].assessment.score,
                    "labels": sorted(self._entries[mid].assessment.labels),
                    "spans": [
                        {"entry_id": s.entry_id, "start": s.start,
                         "end": s.end, "surface": s.surface}
                        for s in self._entries[mid].assessment.matches
                    ],
                    "inserted_at": self._entries[mid].inserted_at.isoformat(),
                }
                for mid in sorted(self._entries)
            ],
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.snapshot(), fh, ensure_ascii=False, indent=None,
                      sort_keys=True)

    @classmethod
    def restore(cls, doc: dict) -> "RankedPool":
        if doc.get("version") != SNAPSHOT_VERSION:
            raise ValueError(f"unsupported snapshot version {doc.get('version')!r}")
        pool = cls(doc["language"], doc["capacity"],
                   timedelta(seconds=doc["window_seconds"]))
        for item in doc["entries"]:
            message = Message.from_dict(item["message"])
            spans = tuple(MatchSpan(s["entry_id"], s["start"], s["end"], s["surface"])
                          for s in item["spans"])
            assessment = Assessment(message.id, item["score"],
                                    frozenset(item["labels"]), spans,
                                    message.timestamp)
            entry = PoolEntry(message, assessment,
                              datetime.fromisoformat(item["inserted_at"]))
            pool._insert(entry)
        return pool

    @classmethod
    def load(cls, path) -> "RankedPool":
        with open(path, encoding="utf-8") as fh:
            return cls.restore(json.load(fh))
