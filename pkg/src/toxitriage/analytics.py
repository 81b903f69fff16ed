"""Rates, distributions, time series, and burst detection over the ledger.

All analytics are pure functions of their snapshot inputs, so replaying the
same ledger always yields identical reports. Rates are computed as exact
fractions (liked responses / posted responses) and only converted to floats
at the serialization edge.

"Engagement rate" means the fraction of responses that received at least
one LIKE. REPLY events are counted separately and never enter the rate.
"""

from __future__ import annotations

import csv
import io
import statistics
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from fractions import Fraction
from typing import Iterable

from .moderation import Ledger
from .responder import Meme, Response, TextSource
from .scoring import Assessment

COMPOSITION_CLASSES = ("MEME_ONLY", "AI_TEXT_ONLY", "HUMAN_TEXT_ONLY",
                       "MEME+HUMAN_TEXT", "MEME+AI_TEXT")

PEAK_WINDOW_DAYS = 14
PEAK_THRESHOLD = 2.0
PEAK_MIN_HISTORY = 7


def composition_class(response: Response) -> str:
    """Bucket a response by what it contains: meme, human text, AI text."""
    has_meme = response.meme_id is not None
    source = response.text_source
    ai_text = source in (TextSource.GENERATED, TextSource.EDITED)
    if response.text is None:
        return "MEME_ONLY"
    if has_meme:
        return "MEME+AI_TEXT" if ai_text else "MEME+HUMAN_TEXT"
    return "AI_TEXT_ONLY" if ai_text else "HUMAN_TEXT_ONLY"


def _liked_response_ids(events: Iterable[dict]) -> set[str]:
    return {e["response_id"] for e in events if e.get("kind") == "LIKE"}


@dataclass(frozen=True)
class EngagementStats:
    key: str
    posts: int
    liked_posts: int

    @property
    def rate(self) -> Fraction | None:
        if self.posts == 0:
            return None
        return Fraction(self.liked_posts, self.posts)


def _group_stats(responses: Iterable[Response], liked: set[str],
                 key_of) -> dict[str, EngagementStats]:
    posts: dict[str, int] = {}
    liked_posts: dict[str, int] = {}
    for r in responses:
        key = key_of(r)
        if key is None:
            continue
        posts[key] = posts.get(key, 0) + 1
        if r.id in liked:
            liked_posts[key] = liked_posts.get(key, 0) + 1
    return {k: EngagementStats(k, posts[k], liked_posts.get(k, 0))
            for k in posts}


def engagement_by_meme(ledger: Ledger) -> dict[str, EngagementStats]:
    liked = _liked_response_ids(ledger.events)
    return _group_stats(ledger.responses.values(), liked, lambda r: r.meme_id)


def engagement_by_style(ledger: Ledger,
                        memes: Iterable[Meme]) -> dict[str, EngagementStats]:
    style_of = {m.id: m.style for m in memes}
    liked = _liked_response_ids(ledger.events)
    return _group_stats(ledger.responses.values(), liked,
                        lambda r: style_of.get(r.meme_id))


def engagement_by_grammar(ledger: Ledger,
                          grammar_of: dict[str, str]) -> dict[str, EngagementStats]:
    """Group by originating grammar; ``grammar_of`` maps response id -> grammar id."""
    liked = _liked_response_ids(ledger.events)
    return _group_stats(ledger.responses.values(), liked,
                        lambda r: grammar_of.get(r.id))


def engagement_rate(key: str, stats: dict[str, EngagementStats]) -> Fraction | None:
    entry = stats.get(key)
    return entry.rate if entry else None


def composition_rates(ledger: Ledger) -> dict[str, Fraction | None]:
    liked = _liked_response_ids(ledger.events)
    grouped = _group_stats(ledger.responses.values(), liked, composition_class)
    return {cls: (grouped[cls].rate if cls in grouped else None)
            for cls in COMPOSITION_CLASSES}


def reply_counts(ledger: Ledger) -> dict[str, int]:
    """REPLY events per response id; tracked apart from the like-based rate."""
    counts: dict[str, int] = {}
    for e in ledger.events:
        if e.get("kind") == "REPLY":
            rid = e["response_id"]
            counts[rid] = counts.get(rid, 0) + 1
    return counts


# -- distributions --------------------------------------------------------

def label_distribution(assessments: Iterable[Assessment]) -> dict[str, Fraction]:
    """Share of assessments carrying each label.

    Multi-label messages count toward each of their labels, so shares can
    sum above 1. Empty input gives all-zero shares.
    """
    from .lexicon import LABELS
    items = list(assessments)
    total = len(items)
    counts = {label: 0 for label in sorted(LABELS)}
    for a in items:
        for label in a.labels:
            counts[label] += 1
    if total == 0:
        return {label: Fraction(0) for label in counts}
    return {label: Fraction(counts[label], total) for label in counts}


@dataclass(frozen=True)
class LanguageRow:
    language: str
    seen: int
    label_counts: dict[str, int]
    replies: int
    reports: int
    removal: Fraction | None  # None when there are no reports


def language_table(rows: Iterable[LanguageRow]) -> tuple[str, str]:
    """Render per-language stats as (CSV text, aligned text table)."""
    from .lexicon import LABELS
    labels = sorted(LABELS)
    header = ["language", "seen", *[l.lower() for l in labels],
              "replies", "reports", "removal_pct"]
    ordered = sorted(rows, key=lambda r: r.language)
    table_rows = []
    for row in ordered:
        removal = ("–" if row.removal is None
                   else f"{float(row.removal) * 100:.1f}")
        table_rows.append([row.language, str(row.seen),
                           *[str(row.label_counts.get(l, 0)) for l in labels],
                           str(row.replies), str(row.reports), removal])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(table_rows)
    csv_text = buf.getvalue()
    widths = [max(len(h), *(len(r[i]) for r in table_rows)) if table_rows else len(h)
              for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    for r in table_rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    return csv_text, "\n".join(lines) + "\n"


def removal_ratio(ledger: Ledger,
                  period: tuple[datetime, datetime] | None = None) -> Fraction | None:
    """REMOVED / all reports in the period; None when nothing was reported."""
    reports = list(ledger.reports.values())
    if period is not None:
        start, end = period
        reports = [r for r in reports if start <= r.reported_at < end]
    if not reports:
        return None
    removed = sum(1 for r in reports if r.outcome == "REMOVED")
    return Fraction(removed, len(reports))


# -- time series and peaks ------------------------------------------------

@dataclass(frozen=True)
class TimeSeries:
    language: str
    label: str | None
    buckets: dict[date, int]  # contiguous, zero-filled

    def counts(self) -> list[int]:
        return [self.buckets[d] for d in sorted(self.buckets)]


def build_timeseries(assessments: Iterable[Assessment], language: str | None = None,
                     label: str | None = None,
                     language_of: dict[str, str] | None = None) -> TimeSeries:
    """Daily toxic-message counts, zero-filled between first and last date.

    ``language_of`` maps message id -> language when the assessments span
    several languages; without it no language filtering happens.
    """
    counts: dict[date, int] = {}
    for a in assessments:
        if a.score <= 0:
            continue
        if label is not None and label not in a.labels:
            continue
        if language is not None and language_of is not None:
            if language_of.get(a.message_id) != language:
                continue
        day = a.timestamp.date()
        counts[day] = counts.get(day, 0) + 1
    if counts:
        first, last = min(counts), max(counts)
        day = first
        while day <= last:
            counts.setdefault(day, 0)
            day += timedelta(days=1)
    return TimeSeries(language or "", label, counts)


@dataclass(frozen=True)
class PeakFlag:
    day: date
    count: int
    trailing_mean: float
    trailing_sd: float
    z_score: float


def detect_peaks(series: TimeSeries, window: int = PEAK_WINDOW_DAYS,
                 k: float = PEAK_THRESHOLD,
                 min_history: int = PEAK_MIN_HISTORY) -> list[PeakFlag]:
    """Flag days whose count exceeds trailing mean + k * trailing sd.

    The trailing window covers up to ``window`` previous days and needs at
    least ``min_history`` of them. Days with zero trailing spread are only
    flagged on a strict rise above the mean (degenerate-sd rule); z-scores
    are scale-invariant, so uniformly scaling all counts changes nothing.
    """
    if window < min_history:
        raise ValueError("window must be >= min_history")
    days = sorted(series.buckets)
    counts = [series.buckets[d] for d in days]
    flags = []
    for i, day in enumerate(days):
        history = counts[max(0, i - window):i]
        if len(history) < min_history:
            continue
        mean = statistics.fmean(history)
        sd = statistics.pstdev(history)
        count = counts[i]
        if sd > 0:
            if count > mean + k * sd:
                flags.append(PeakFlag(day, count, mean, sd,
                                      (count - mean) / sd))
        elif count > mean:
            flags.append(PeakFlag(day, count, mean, 0.0, float("inf")))
    return flags


# -- chart output ---------------------------------------------------------

def timeseries_svg(series: TimeSeries, width: int = 800, height: int = 240,
                   peaks: list[PeakFlag] | None = None) -> str:
    """Minimal static SVG line chart of a daily series (with peak markers)."""
    days = sorted(series.buckets)
    pad = 30
    if not days:
        return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
                f'height="{height}"><text x="{width // 2}" y="{height // 2}" '
                f'text-anchor="middle">no data</text></svg>')
    counts = [series.buckets[d] for d in days]
    peak_days = {p.day for p in peaks} if peaks else set()
    max_count = max(max(counts), 1)
    span = max(len(days) - 1, 1)

    def x(i):
        return pad + (width - 2 * pad) * i / span

    def y(c):
        return height - pad - (height - 2 * pad) * c / max_count

    points = " ".join(f"{x(i):.1f},{y(c):.1f}" for i, c in enumerate(counts))
    markers = "".join(
        f'<circle cx="{x(i):.1f}" cy="{y(c):.1f}" r="4" fill="crimson"/>'
        for i, (d, c) in enumerate(zip(days, counts)) if d in peak_days)
    title = series.language or "all"
    if series.label:
        title += f" / {series.label}"
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">'
        f'<text x="{pad}" y="18" font-family="sans-serif" font-size="12">'
        f'toxic messages per day ({title})</text>'
        f'<polyline fill="none" stroke="steelblue" stroke-width="1.5" '
        f'points="{points}"/>{markers}'
        f'<text x="{pad}" y="{height - 8}" font-size="10">{days[0]}</text>'
        f'<text x="{width - pad}" y="{height - 8}" font-size="10" '
        f'text-anchor="end">{days[-1]}</text></svg>')
