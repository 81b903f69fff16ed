"""Operator command line: serve the API, replay corpora, emit reports,
expand grammars, and extract trends.

Exit codes: 0 success, 1 validation failure, 2 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analytics
from .api import build_language_rows, create_app, default_state
from .config import AppConfig
from .ingest import (ConfigurationError, extract_trends,
                     pseudonym_key_from_env, replay_corpus)
from .lexicon import LexiconError, load_lexicon
from .pool import RankedPool
from .responder import CatalogError, expand, expansion_count, load_grammar

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="toxitriage",
        description="Toxicity triage: scan, rank, respond, report, measure.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="start the dashboard API")
    p_serve.add_argument("--config", type=Path, default=None)
    p_serve.add_argument("--host", default=None)
    p_serve.add_argument("--port", type=int, default=None)

    p_ingest = sub.add_parser("ingest", help="replay a JSONL corpus into a pool")
    p_ingest.add_argument("--corpus", type=Path, required=True)
    p_ingest.add_argument("--lexicon", type=Path, required=True)
    p_ingest.add_argument("--lang", required=True)
    p_ingest.add_argument("--capacity", type=int, default=2000)
    p_ingest.add_argument("--snapshot", type=Path, default=None,
                          help="write the final pool snapshot to this file")

    p_report = sub.add_parser("report", help="emit analytics from a ledger")
    p_report.add_argument("--format", choices=("csv", "json", "svg"),
                          default="csv")
    p_report.add_argument("--ledger", type=Path, default=None)
    p_report.add_argument("--lang", default=None,
                          help="language for svg time series output")

    p_gen = sub.add_parser("gen", help="expand a grammar file")
    p_gen.add_argument("--grammar", type=Path, required=True)
    group = p_gen.add_mutually_exclusive_group()
    group.add_argument("--index", type=int, default=None)
    group.add_argument("--all", action="store_true")

    p_trends = sub.add_parser("trends", help="extract trends from headlines")
    p_trends.add_argument("--headlines", type=Path, required=True)
    p_trends.add_argument("--k", type=int, default=10)
    p_trends.add_argument("--lang", default="en")
    return parser


def _cmd_serve(args) -> int:
    import uvicorn
    config = AppConfig.from_file(args.config) if args.config else AppConfig()
    if args.host:
        config.host = args.host
    if args.port:
        config.port = args.port
    state = default_state(config)
    uvicorn.run(create_app(state), host=config.host, port=config.port)
    return EXIT_OK


def _cmd_ingest(args) -> int:
    try:
        key = pseudonym_key_from_env()
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        lexicon = load_lexicon(args.lexicon, args.lang)
    except LexiconError as exc:
        print(f"error: lexicon: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    pool = RankedPool(args.lang, capacity=args.capacity)
    try:
        stats = replay_corpus(args.corpus, lexicon, pool, key)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(json.dumps({**stats.to_dict(), "pool_size": len(pool)}))
    if args.snapshot:
        pool.save(args.snapshot)
    return EXIT_OK


def _cmd_report(args) -> int:
    config = AppConfig()
    if args.ledger:
        config.ledger_path = args.ledger
    try:
        state = default_state(config)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    rows = build_language_rows(state)
    csv_text, table_text = analytics.language_table(rows)
    if args.format == "csv":
        print(csv_text, end="")
    elif args.format == "json":
        rates = analytics.composition_rates(state.ledger)
        ratio = analytics.removal_ratio(state.ledger)
        print(json.dumps({
            "languages": [
                {"language": r.language, "seen": r.seen,
                 "labels": r.label_counts, "replies": r.replies,
                 "reports": r.reports,
                 "removal": None if r.removal is None else float(r.removal)}
                for r in rows],
            "composition": {k: (None if v is None else float(v))
                            for k, v in rates.items()},
            "removal_ratio": None if ratio is None else float(ratio),
        }, ensure_ascii=False))
    else:
        lang = args.lang or (sorted(state.pools)[0] if state.pools else "")
        series = analytics.build_timeseries(state.assessments.values(),
                                            lang, None, state.language_of)
        peaks = analytics.detect_peaks(series) if series.buckets else []
        print(analytics.timeseries_svg(series, peaks=peaks))
    return EXIT_OK


def _cmd_gen(args) -> int:
    try:
        grammar = load_grammar(args.grammar)
    except CatalogError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    count = expansion_count(grammar)
    if args.all:
        for i in range(count):
            print(expand(grammar, i))
    elif args.index is not None:
        if not 0 <= args.index < count:
            print(f"error: index {args.index} out of range [0, {count})",
                  file=sys.stderr)
            return EXIT_VALIDATION
        print(expand(grammar, args.index))
    else:
        print(count)
    return EXIT_OK


def _cmd_trends(args) -> int:
    try:
        headlines = args.headlines.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.k < 0:
        print("error: --k must be >= 0", file=sys.stderr)
        return EXIT_VALIDATION
    for trend in extract_trends(headlines, args.lang, args.k):
        print(f"{trend.term}\t{trend.weight}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    handlers = {"serve": _cmd_serve, "ingest": _cmd_ingest,
                "report": _cmd_report, "gen": _cmd_gen,
                "trends": _cmd_trends}
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
