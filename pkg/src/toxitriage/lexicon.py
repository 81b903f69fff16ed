"""Weighted multi-label lexicon of toxic expressions, and a token-level scanner.

A lexicon is a list of patterns, each an ordered sequence of tokens where a
token is either a literal word or the single-token wildcard slot ``<*>``.
Patterns carry an integer severity weight (1..5) and one or more labels from
the six-label taxonomy. Lexicons are loaded from hand-editable TSV files and
compiled into a token trie so that one pass over a message finds every
occurrence of every pattern.

The wildcard slot matches exactly one token that is not in the per-language
function-word stoplist, which approximates "<profanity> <noun>" style
patterns without a POS tagger. Matching is case-insensitive and exact per
token: no stemming, no spelling variants. That keeps every hit auditable.

A compiled :class:`Lexicon` is immutable and safe to share across threads;
:func:`scan` is pure and reentrant.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable

WILDCARD = "<*>"

LABELS = frozenset(
    {"PROFANITY", "RIDICULE", "RACISM", "SEXISM", "THREAT", "CONSPIRACY"}
)

MIN_WEIGHT = 1
MAX_WEIGHT = 5


class LexiconError(ValueError):
    """Raised when a lexicon file fails validation; carries the line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _is_strippable(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _clean_token(raw: str) -> str:
    """Strip leading/trailing punctuation, preserving a leading ``@``."""
    start, end = 0, len(raw)
    while start < end and _is_strippable(raw[start]) and raw[start] != "@":
        start += 1
    while end > start and _is_strippable(raw[end - 1]):
        end -= 1
    return raw[start:end]


def tokenize(text: str) -> list[str]:
    """Split ``text`` into lowercased tokens.

    Tokens are whitespace-separated chunks with leading/trailing punctuation
    stripped. ``@mentions`` keep their ``@``; emoji survive as single tokens
    (they are symbols, not punctuation). Deterministic; empty input gives [].
    """
    tokens = []
    for chunk in text.lower().split():
        cleaned = _clean_token(chunk)
        if cleaned:
            tokens.append(cleaned)
    return tokens


@dataclass(frozen=True)
class LexiconEntry:
    id: int
    pattern: tuple[str, ...]  # literal tokens, or WILDCARD
    weight: int
    labels: frozenset[str]

    def __post_init__(self):
        if not self.pattern:
            raise LexiconError("empty pattern")
        if all(t == WILDCARD for t in self.pattern):
            raise LexiconError("pattern needs at least one literal token")
        if not MIN_WEIGHT <= self.weight <= MAX_WEIGHT:
            raise LexiconError(f"weight {self.weight} out of range [1,5]")
        if not self.labels:
            raise LexiconError("entry has no labels")
        unknown = self.labels - LABELS
        if unknown:
            raise LexiconError(f"unknown label(s): {', '.join(sorted(unknown))}")


@dataclass(frozen=True)
class MatchSpan:
    entry_id: int
    start: int
    end: int  # exclusive token index
    surface: str


class _Node:
    __slots__ = ("children", "wildcard", "terminals")

    def __init__(self):
        self.children: dict[str, _Node] = {}
        self.wildcard: _Node | None = None
        self.terminals: list[tuple[int, int]] = []  # (entry id, pattern length)


class Lexicon:
    """A compiled, immutable pattern set for one language."""

    def __init__(self, language: str, entries: Iterable[LexiconEntry],
                 stopwords: frozenset[str] = frozenset()):
        self.language = language.lower()
        self.entries = tuple(entries)
        self.stopwords = stopwords
        seen_ids = set()
        for e in self.entries:
            if e.id in seen_ids:
                raise LexiconError(f"duplicate entry id {e.id}")
            seen_ids.add(e.id)
        self._root = _Node()
        for e in self.entries:
            node = self._root
            for tok in e.pattern:
                if tok == WILDCARD:
                    if node.wildcard is None:
                        node.wildcard = _Node()
                    node = node.wildcard
                else:
                    nxt = node.children.get(tok)
                    if nxt is None:
                        nxt = node.children[tok] = _Node()
                    node = nxt
            node.terminals.append((e.id, len(e.pattern)))
        # fast reject set for scan start positions
        self._root_literals = frozenset(self._root.children)
        self._root_has_wildcard = self._root.wildcard is not None
        self._by_id = {e.id: e for e in self.entries}

    def entry(self, entry_id: int) -> LexiconEntry:
        return self._by_id[entry_id]

    def __len__(self) -> int:
        return len(self.entries)

    def patterns(self) -> set[tuple[str, ...]]:
        """Pattern set described by the entry list (round-trip check hook)."""
        return {e.pattern for e in self.entries}

    def compiled_patterns(self) -> set[tuple[str, ...]]:
        """Pattern set reachable in the compiled trie."""
        out: set[tuple[str, ...]] = set()

        def walk(node: _Node, prefix: tuple[str, ...]):
            if node.terminals:
                out.add(prefix)
            for tok, child in node.children.items():
                walk(child, prefix + (tok,))
            if node.wildcard is not None:
                walk(node.wildcard, prefix + (WILDCARD,))

        walk(self._root, ())
        return out

    def keywords(self) -> list[str]:
        """First literal token of every entry, deduplicated in entry order."""
        seen, out = set(), []
        for e in self.entries:
            for tok in e.pattern:
                if tok != WILDCARD:
                    if tok not in seen:
                        seen.add(tok)
                        out.append(tok)
                    break
        return out


def parse_rows(rows: Iterable[str], language: str,
               stopwords: frozenset[str] = frozenset()) -> Lexicon:
    """Build a Lexicon from TSV rows: ``pattern<TAB>weight<TAB>LABEL[;LABEL]``.

    Comment lines (``#``) and blank lines are skipped. Any malformed row
    aborts the load with the offending line number.
    """
    entries = []
    next_id = 1
    for lineno, raw in enumerate(rows, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise LexiconError(f"expected 3 tab-separated columns, got {len(cols)}", lineno)
        pattern_text, weight_text, labels_text = cols
        tokens = []
        for piece in pattern_text.split():
            if piece == WILDCARD:
                tokens.append(WILDCARD)
            else:
                cleaned = _clean_token(piece.lower())
                if cleaned:
                    tokens.append(cleaned)
        if not tokens:
            raise LexiconError("empty pattern", lineno)
        try:
            weight = int(weight_text)
        except ValueError:
            raise LexiconError(f"weight {weight_text!r} is not an integer", lineno) from None
        labels = frozenset(l.strip().upper() for l in labels_text.split(";") if l.strip())
        try:
            entry = LexiconEntry(next_id, tuple(tokens), weight, labels)
        except LexiconError as exc:
            raise LexiconError(str(exc), lineno) from None
        entries.append(entry)
        next_id += 1
    return Lexicon(language, entries, stopwords)


def load_lexicon(source: str | Path, language: str,
                 stopwords: frozenset[str] | None = None) -> Lexicon:
    """Load and compile a lexicon TSV file for ``language``."""
    if stopwords is None:
        stopwords = load_stopwords(language)
    text = Path(source).read_text(encoding="utf-8")
    return parse_rows(text.splitlines(), language, stopwords)


def load_stopwords(language: str) -> frozenset[str]:
    """Bundled function-word stoplist for a language; empty if none ships."""
    ref = resources.files("toxitriage.data.stopwords") / f"{language.lower()}.txt"
    try:
        text = ref.read_text(encoding="utf-8")
    except FileNotFoundError:
        return frozenset()
    return frozenset(w.strip().lower() for w in text.splitlines()
                     if w.strip() and not w.startswith("#"))


def bundled_lexicon(language: str) -> Lexicon:
    """Load one of the starter lexicons shipped with the package."""
    ref = resources.files("toxitriage.data.lexicons") / f"{language.lower()}.tsv"
    text = ref.read_text(encoding="utf-8")
    return parse_rows(text.splitlines(), language, load_stopwords(language))


def scan(text: str, lexicon: Lexicon) -> list[MatchSpan]:
    """Find every occurrence of every lexicon entry in ``text``.

    Overlapping matches from different entries (and repeated matches of the
    same entry) are all reported, ordered by start token index then entry id.
    """
    tokens = tokenize(text)
    return scan_tokens(tokens, lexicon)


def scan_tokens(tokens: list[str], lexicon: Lexicon) -> list[MatchSpan]:
    spans: list[MatchSpan] = []
    root = lexicon._root
    root_literals = lexicon._root_literals
    root_wild = lexicon._root_has_wildcard
    stop = lexicon.stopwords
    n = len(tokens)
    for i in range(n):
        tok = tokens[i]
        if tok not in root_literals and not (root_wild and tok not in stop):
            continue
        # DFS over (node, next token index); wildcard edges branch
        stack = [(root, i)]
        while stack:
            node, j = stack.pop()
            for entry_id, length in node.terminals:
                spans.append(MatchSpan(entry_id, i, i + length,
                                       " ".join(tokens[i:i + length])))
            if j >= n:
                continue
            tok_j = tokens[j]
            child = node.children.get(tok_j)
            if child is not None:
                stack.append((child, j + 1))
            if node.wildcard is not None and tok_j not in stop:
                stack.append((node.wildcard, j + 1))
    spans.sort(key=lambda s: (s.start, s.entry_id))
    return spans
