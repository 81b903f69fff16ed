"""HTTP surface for the dashboard, backed by the in-process triage state.

All state is rebuildable from the append-only ledger file plus the
immutable catalogs; there is no database. Payloads only ever contain
pseudonyms, never raw author handles, and never the pseudonymization key.

Mutations are conflict-checked per message id: retrying a successful act
returns a conflict instead of a duplicate record. An optional static API
token guards mutating endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import Body, FastAPI, Header, HTTPException, Query

from . import analytics
from .config import AppConfig
from .ingest import Message
from .lexicon import Lexicon, bundled_lexicon, load_lexicon
from .moderation import (ConflictError, DecisionTree, InvalidOptionError,
                         Ledger, NotFoundError, ReportRecord, load_tree, walk)
from .pool import RankedPool
from .responder import (CatalogError, Grammar, GrammarStats, Meme,
                        ResponseError, TextSource, compose_response,
                        expand, expansion_count, load_grammar, load_memes,
                        parse_grammar, parse_memes, suggest)
from .scoring import Assessment


@dataclass
class AppState:
    """Everything the endpoints read and mutate, shared with the CLI."""
    config: AppConfig = field(default_factory=AppConfig)
    lexicons: dict[str, Lexicon] = field(default_factory=dict)
    pools: dict[str, RankedPool] = field(default_factory=dict)
    memes: list[Meme] = field(default_factory=list)
    grammars: dict[str, Grammar] = field(default_factory=dict)
    trees: dict[str, DecisionTree] = field(default_factory=dict)
    ledger: Ledger = field(default_factory=Ledger)
    messages: dict[str, Message] = field(default_factory=dict)
    assessments: dict[str, Assessment] = field(default_factory=dict)
    language_of: dict[str, str] = field(default_factory=dict)
    grammar_of_response: dict[str, str] = field(default_factory=dict)
    seen_by_language: dict[str, int] = field(default_factory=dict)

    def pool(self, language: str) -> RankedPool:
        language = language.lower()
        if language not in self.pools:
            self.pools[language] = RankedPool(language,
                                             self.config.pool_capacity,
                                             self.config.pool_window)
        return self.pools[language]

    def register(self, message: Message, assessment: Assessment):
        """Track a pool-accepted message for later acting and analytics."""
        self.messages[message.id] = message
        self.assessments[message.id] = assessment
        self.language_of[message.id] = message.language

    def grammar_stats(self) -> dict[str, GrammarStats]:
        grouped = analytics.engagement_by_grammar(self.ledger,
                                                  self.grammar_of_response)
        return {gid: GrammarStats(s.posts, s.liked_posts)
                for gid, s in grouped.items()}


def default_state(config: AppConfig | None = None) -> AppState:
    """State wired to the bundled catalogs (and the configured ledger file)."""
    config = config or AppConfig()
    state = AppState(config=config)
    for lang in config.languages:
        if config.lexicon_dir:
            path = Path(config.lexicon_dir) / f"{lang}.tsv"
            state.lexicons[lang] = load_lexicon(path, lang)
        else:
            state.lexicons[lang] = bundled_lexicon(lang)
        state.pool(lang)
    from importlib import resources
    data = resources.files("toxitriage.data")
    if config.meme_catalog:
        state.memes = load_memes(config.meme_catalog)
    else:
        import json
        state.memes = parse_memes(json.loads(
            (data / "memes.json").read_text(encoding="utf-8")))
    grammar_dir = (Path(config.grammar_dir) if config.grammar_dir
                   else Path(str(data / "grammars")))
    for path in sorted(grammar_dir.glob("*.json")):
        grammar = load_grammar(path)
        state.grammars[grammar.id] = grammar
    tree_dir = (Path(config.tree_dir) if config.tree_dir
                else Path(str(data / "trees")))
    for path in sorted(tree_dir.glob("*.json")):
        tree = load_tree(path)
        state.trees[tree.language] = tree
    if config.ledger_path:
        state.ledger = Ledger(config.ledger_path)
    return state


def _now() -> datetime:
    return datetime.now(timezone.utc)


def replay_into_state(state: AppState, source, key: str | None = None):
    """Replay a mixed-language JSONL corpus into the per-language pools.

    Splits the stream by language (per-language timestamp order is
    preserved), runs the standard replay for each, and registers accepted
    messages for acting and analytics. Returns per-language IngestStats.
    """
    from .ingest import iter_jsonl, pseudonym_key_from_env, replay_corpus
    if key is None:
        key = pseudonym_key_from_env()
    if isinstance(source, (str, Path)):
        raws = list(iter_jsonl(source))
    else:
        raws = list(source)
    stats = {}
    for lang, lexicon in state.lexicons.items():
        subset = [r for r in raws if r is not None and r.language.lower() == lang]
        pool = state.pool(lang)
        stats[lang] = replay_corpus(subset, lexicon, pool, key,
                                    on_message=state.register)
        state.seen_by_language[lang] = (
            state.seen_by_language.get(lang, 0) + stats[lang].toxic)
    return stats


def create_app(state: AppState) -> FastAPI:
    app = FastAPI(title="toxitriage", version="0.1.0")
    app.state.triage = state

    def check_token(token: str | None):
        expected = state.config.api_token
        if expected and token != expected:
            raise HTTPException(401, "missing or invalid API token")

    @app.get("/messages")
    def list_ranked(lang: str = Query(...), limit: int = Query(50, ge=0)):
        pool = state.pools.get(lang.lower())
        if pool is None:
            raise HTTPException(404, f"no pool for language {lang!r}")
        page = []
        for entry in pool.top(limit):
            a = entry.assessment
            page.append({
                "id": entry.message.id,
                "text": entry.message.text,
                "lang": entry.message.language,
                "ts": entry.message.timestamp.isoformat(),
                "author": entry.message.author_pseudonym,
                "reply_to": entry.message.reply_to,
                "score": a.score,
                "labels": sorted(a.labels),
                "spans": [{"entry_id": s.entry_id, "start": s.start,
                           "end": s.end, "surface": s.surface}
                          for s in a.matches],
            })
        return {"lang": lang.lower(), "messages": page}

    @app.post("/messages/{message_id}/act", status_code=201)
    def act(message_id: str, body: dict = Body(...),
            x_api_token: str | None = Header(default=None)):
        check_token(x_api_token)
        action = body.get("action")
        actor = body.get("actor", "")
        if action not in ("RESPOND", "REPORT", "IGNORE"):
            raise HTTPException(400, f"unknown action {action!r}")
        message = state.messages.get(message_id)
        if message is None:
            raise HTTPException(404, f"unknown message {message_id!r}")
        if state.ledger.has_acted(message_id):
            raise HTTPException(409, f"message {message_id} already acted on")
        now = _now()
        pool = state.pools.get(message.language)
        payload = None
        if action == "RESPOND":
            meme = None
            meme_id = body.get("meme_id")
            if meme_id is not None:
                meme = next((m for m in state.memes if m.id == meme_id), None)
                if meme is None:
                    raise HTTPException(400, f"unknown meme {meme_id!r}")
            response_id = f"resp-{len(state.ledger.responses) + 1:06d}"
            try:
                response = compose_response(
                    response_id, message_id, meme=meme,
                    text=body.get("text"),
                    text_source=body.get("text_source", TextSource.NONE),
                    posted_at=now, account=state.config.account)
            except ResponseError as exc:
                raise HTTPException(400, str(exc)) from None
            state.ledger.add_response(response)
            if body.get("grammar_id"):
                state.grammar_of_response[response_id] = body["grammar_id"]
            payload = response_id
        elif action == "REPORT":
            transcript = body.get("transcript", [])
            tree = state.trees.get(message.language)
            if tree is None:
                raise HTTPException(400,
                                    f"no decision tree for {message.language!r}")
            try:
                result = walk(tree, transcript)
            except InvalidOptionError as exc:
                raise HTTPException(400, str(exc)) from None
            if result.terminal not in ("REPORT_PLATFORM", "REPORT_POLICE"):
                raise HTTPException(
                    400, f"transcript ends at {result.terminal or 'a question'}, "
                         "not a report terminal")
            channel = ("POLICE" if result.terminal == "REPORT_POLICE"
                       else "PLATFORM")
            report_id = f"rep-{len(state.ledger.reports) + 1:06d}"
            state.ledger.add_report(ReportRecord(report_id, message_id,
                                                 now, channel))
            payload = report_id
        try:
            record = state.ledger.record_action(message_id, action, payload,
                                                actor, now, pool)
        except ConflictError as exc:
            raise HTTPException(409, str(exc)) from None
        except ValueError as exc:
            raise HTTPException(400, str(exc)) from None
        return record.to_dict()

    @app.get("/memes")
    def list_memes():
        return [{"id": m.id, "style": m.style, "captions": m.captions,
                 "image": m.image} for m in state.memes]

    @app.get("/suggestions")
    def suggestions(message_id: str = Query(...), n: int = Query(5, ge=0)):
        message = state.messages.get(message_id)
        assessment = state.assessments.get(message_id)
        if message is None or assessment is None:
            raise HTTPException(404, f"unknown message {message_id!r}")
        out = suggest(message, assessment, state.grammars.values(),
                      state.grammar_stats(), n,
                      state.config.tone_compatibility)
        return [{"grammar_id": s.grammar_id, "text": s.text,
                 "rank": float(s.rank)} for s in out]

    @app.post("/grammars/preview")
    def grammar_preview(body: dict = Body(...)):
        n = int(body.pop("n", 5))
        try:
            grammar = parse_grammar(body)
            count = expansion_count(grammar)
        except CatalogError as exc:
            raise HTTPException(400, str(exc)) from None
        samples = []
        if count:
            step = max(count // max(n, 1), 1)
            samples = [expand(grammar, (i * step) % count) for i in range(min(n, count))]
        return {"count": count, "samples": samples}

    @app.post("/grammars", status_code=201)
    def publish_grammar(body: dict = Body(...),
                        x_api_token: str | None = Header(default=None)):
        check_token(x_api_token)
        try:
            grammar = parse_grammar(body)
        except CatalogError as exc:
            raise HTTPException(400, str(exc)) from None
        if not grammar.id:
            raise HTTPException(400, "grammar needs an id")
        state.grammars[grammar.id] = grammar
        return {"id": grammar.id, "count": expansion_count(grammar)}

    @app.get("/trees/{lang}")
    def get_tree(lang: str):
        tree = state.trees.get(lang.lower())
        if tree is None:
            raise HTTPException(404, f"no decision tree for {lang!r}")
        return {
            "id": tree.id, "lang": tree.language, "root": tree.root,
            "nodes": {nid: {"q": n.question, "options": n.options}
                      for nid, n in tree.nodes.items()},
        }

    @app.post("/reports/{report_id}/outcome")
    def report_outcome(report_id: str, body: dict = Body(...),
                       x_api_token: str | None = Header(default=None)):
        check_token(x_api_token)
        outcome = body.get("outcome")
        at = (datetime.fromisoformat(body["at"]) if body.get("at") else _now())
        try:
            report = state.ledger.update_report_outcome(report_id, outcome, at)
        except NotFoundError as exc:
            raise HTTPException(404, str(exc)) from None
        except ConflictError as exc:
            raise HTTPException(409, str(exc)) from None
        except ValueError as exc:
            raise HTTPException(400, str(exc)) from None
        return report.to_dict()

    @app.post("/engagement/events")
    def ingest_engagement(body: dict = Body(...),
                          x_api_token: str | None = Header(default=None)):
        check_token(x_api_token)
        events = body.get("events", [])
        accepted, rejected = 0, []
        for i, event in enumerate(events):
            rid = event.get("response_id")
            kind = event.get("kind")
            if rid not in state.ledger.responses:
                rejected.append({"index": i, "reason": f"unknown response {rid!r}"})
                continue
            if kind not in ("LIKE", "REPLY"):
                rejected.append({"index": i, "reason": f"unknown kind {kind!r}"})
                continue
            state.ledger.add_event({"response_id": rid, "kind": kind,
                                    "at": event.get("at", _now().isoformat())})
            accepted += 1
        return {"accepted": accepted, "rejected": rejected}

    @app.get("/stats/engagement")
    def stats_engagement(group: str = Query("meme")):
        if group == "meme":
            grouped = analytics.engagement_by_meme(state.ledger)
        elif group == "style":
            grouped = analytics.engagement_by_style(state.ledger, state.memes)
        elif group == "grammar":
            grouped = analytics.engagement_by_grammar(
                state.ledger, state.grammar_of_response)
        elif group == "composition":
            rates = analytics.composition_rates(state.ledger)
            return {"group": group,
                    "rates": {k: (None if v is None else float(v))
                              for k, v in rates.items()}}
        else:
            raise HTTPException(400, f"unknown group {group!r}")
        return {"group": group,
                "rates": {k: {"posts": s.posts, "liked_posts": s.liked_posts,
                              "rate": (None if s.rate is None else float(s.rate))}
                          for k, s in sorted(grouped.items())}}

    @app.get("/stats/labels")
    def stats_labels():
        shares = analytics.label_distribution(state.assessments.values())
        return {label: float(share) for label, share in shares.items()}

    @app.get("/stats/languages")
    def stats_languages():
        rows = build_language_rows(state)
        csv_text, _ = analytics.language_table(rows)
        return {"csv": csv_text,
                "rows": [{"language": r.language, "seen": r.seen,
                          "labels": r.label_counts, "replies": r.replies,
                          "reports": r.reports,
                          "removal": (None if r.removal is None
                                      else float(r.removal))}
                         for r in rows]}

    @app.get("/stats/timeseries")
    def stats_timeseries(lang: str = Query(...),
                         label: str | None = Query(None),
                         svg: bool = Query(False)):
        series = analytics.build_timeseries(state.assessments.values(),
                                            lang.lower(), label,
                                            state.language_of)
        peaks = analytics.detect_peaks(series) if len(series.buckets) else []
        if svg:
            from fastapi.responses import Response as FastApiResponse
            return FastApiResponse(analytics.timeseries_svg(series, peaks=peaks),
                                   media_type="image/svg+xml")
        return {"lang": lang.lower(), "label": label,
                "days": {d.isoformat(): c
                         for d, c in sorted(series.buckets.items())},
                "peaks": [{"day": p.day.isoformat(), "count": p.count,
                           "z": p.z_score} for p in peaks]}

    @app.get("/stats/reports")
    def stats_reports(start: str | None = Query(None),
                      end: str | None = Query(None)):
        period = None
        if start and end:
            period = (datetime.fromisoformat(start),
                      datetime.fromisoformat(end))
        ratio = analytics.removal_ratio(state.ledger, period)
        return {"reports": len(state.ledger.reports),
                "ratio": None if ratio is None else float(ratio)}

    return app


def build_language_rows(state: AppState) -> list[analytics.LanguageRow]:
    """Aggregate the per-language table from state counters and the ledger."""
    from .lexicon import LABELS
    rows = []
    reply_by_response = analytics.reply_counts(state.ledger)
    for lang in sorted(state.pools):
        ids = {mid for mid, l in state.language_of.items() if l == lang}
        seen = state.seen_by_language.get(lang, len(ids))
        label_counts = {label: 0 for label in sorted(LABELS)}
        for mid in ids:
            for label in state.assessments[mid].labels:
                label_counts[label] += 1
        replies = sum(n for rid, n in reply_by_response.items()
                      if state.language_of.get(
                          state.ledger.responses[rid].target_id) == lang)
        reports = [r for r in state.ledger.reports.values()
                   if state.language_of.get(r.message_id) == lang]
        removal = None
        if reports:
            from fractions import Fraction
            removed = sum(1 for r in reports if r.outcome == "REMOVED")
            removal = Fraction(removed, len(reports))
        rows.append(analytics.LanguageRow(lang, seen, label_counts,
                                          replies, len(reports), removal))
    return rows
