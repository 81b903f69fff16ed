"""Normalization, pseudonymization, trends, query budget, and replay."""

import json
import re
from collections import Counter
from datetime import timedelta

import pytest

from conftest import ts
from toxitriage.ingest import (ConfigurationError, IngestStats, QueryBudget,
                               QueryMode, RawMessage, RejectedMessage,
                               TrendTopic, compose_queries, extract_trends,
                               normalize, pseudonymize, replay_corpus)
from toxitriage.lexicon import tokenize
from toxitriage.pool import RankedPool


def raw(i=1, text="you idiot", author="user42", when=ts(2), lang="en",
        reply_to=None):
    return RawMessage(f"src-{i}", text, lang, when.isoformat(), author,
                      reply_to)


class TestPseudonymize:
    def test_deterministic(self):
        assert pseudonymize("user42", "k1") == pseudonymize("user42", "k1")

    def test_key_dependent(self):
        assert pseudonymize("user42", "k1") != pseudonymize("user42", "k2")

    def test_format(self):
        for handle in ["user42", "", "😀", "@somebody_long_handle"]:
            assert re.fullmatch(r"[0-9a-f]{32}", pseudonymize(handle, "k"))

    def test_empty_key_rejected(self):
        with pytest.raises(ConfigurationError):
            pseudonymize("user42", "")


class TestNormalize:
    def test_handle_gone(self):
        msg = normalize(raw(author="user42"), "key")
        assert "user42" not in json.dumps(msg.to_dict())
        assert re.fullmatch(r"[0-9a-f]{32}", msg.author_pseudonym)

    def test_empty_text_rejected(self):
        with pytest.raises(RejectedMessage):
            normalize(raw(text="   "), "key")

    def test_bad_timestamp_rejected(self):
        bad = RawMessage("s", "text", "en", "not-a-date", "a")
        with pytest.raises(RejectedMessage):
            normalize(bad, "key")

    def test_reply_to_preserved(self):
        msg = normalize(raw(reply_to="parent-1"), "key")
        assert msg.reply_to == "parent-1"

    def test_language_lowercased(self):
        assert normalize(raw(lang="EN"), "key").language == "en"

    def test_id_stable(self):
        assert normalize(raw(), "key").id == normalize(raw(), "other").id


class TestTrends:
    def test_dominant_term(self):
        headlines = ["Trump impeachment trial begins",
                     "Trump acquitted after impeachment",
                     "Senate votes on Trump"]
        trends = extract_trends(headlines, "en", 2)
        assert trends[0].term == "trump"
        assert trends[0].weight == 3

    def test_empty_feed(self):
        assert extract_trends([], "en", 5) == []

    def test_stoplist_never_returned(self):
        headlines = ["the the the the", "the storm the"]
        assert all(t.term != "the"
                   for t in extract_trends(headlines, "en", 10))

    def test_short_tokens_dropped(self):
        assert all(len(t.term) >= 3
                   for t in extract_trends(["go go ab xyzzy"], "en", 10))

    def test_prefix_property(self):
        headlines = ["riot riot capitol", "capitol police riot",
                     "election fraud claims", "storm capitol news"]
        for k in range(6):
            shorter = extract_trends(headlines, "en", k)
            longer = extract_trends(headlines, "en", k + 1)
            assert [t.term for t in longer][:k] == [t.term for t in shorter]

    def test_independent_counting_oracle(self):
        headlines = ["alpha beta beta", "gamma beta alpha!", "delta Gamma"]
        counts = Counter(tok for h in headlines for tok in tokenize(h)
                         if len(tok) >= 3)
        trends = extract_trends(headlines, "en", 10,
                                stopwords=frozenset())
        assert {t.term: t.weight for t in trends} == dict(counts)


class TestQueries:
    def test_keywords_round_robin(self):
        kws = ["k1", "k2", "k3", "k4", "k5"]
        budget = QueryBudget(3)
        minute0 = compose_queries(kws, [], budget, QueryMode.KEYWORDS_ONLY, 0)
        minute1 = compose_queries(kws, [], budget, QueryMode.KEYWORDS_ONLY, 1)
        assert [q.terms for q in minute0] == [("k1",), ("k2",), ("k3",)]
        assert [q.terms for q in minute1] == [("k4",), ("k5",), ("k1",)]

    def test_trend_combined_pairing(self):
        trends = [TrendTopic("trump", 5, ts(9))]
        out = compose_queries(["idiot"], trends, QueryBudget(3),
                              QueryMode.TREND_COMBINED, 0)
        assert out[0].terms == ("trump", "idiot")

    def test_no_trends_falls_back(self):
        kws = ["k1", "k2", "k3"]
        combined = compose_queries(kws, [], QueryBudget(3),
                                   QueryMode.TREND_COMBINED, 4)
        plain = compose_queries(kws, [], QueryBudget(3),
                                QueryMode.KEYWORDS_ONLY, 4)
        assert [q.terms for q in combined] == [q.terms for q in plain]

    def test_budget_respected_over_24h(self):
        kws = [f"k{i}" for i in range(7)]
        trends = [TrendTopic(f"t{i}", 10 - i, ts(9)) for i in range(4)]
        budget = QueryBudget(3)
        for minute in range(24 * 60):
            for mode in QueryMode:
                queries = compose_queries(kws, trends, budget, mode, minute)
                assert len(queries) <= budget.max_per_minute

    def test_budget_positive(self):
        with pytest.raises(ValueError):
            QueryBudget(0)


class TestReplay:
    def write_corpus(self, path, lines):
        path.write_text("\n".join(lines), encoding="utf-8")

    def test_counts(self, tmp_path, en_lexicon):
        lines = []
        for i, text in enumerate(["you idiot", "nice weather", "scum!",
                                  "hello there", "what a clown"]):
            doc = {"id": f"m{i}", "text": text, "lang": "en",
                   "ts": (ts(2) + timedelta(minutes=i)).isoformat(),
                   "author": f"user{i}"}
            lines.append(json.dumps(doc))
        path = tmp_path / "corpus.jsonl"
        self.write_corpus(path, lines)
        pool = RankedPool("en")
        stats = replay_corpus(path, en_lexicon, pool, "key")
        assert stats.seen == 5
        assert stats.toxic == 3
        assert stats.accepted == 3
        assert len(pool) == 3

    def test_empty_file(self, tmp_path, en_lexicon):
        path = tmp_path / "corpus.jsonl"
        path.write_text("", encoding="utf-8")
        stats = replay_corpus(path, en_lexicon, RankedPool("en"), "key")
        assert stats == IngestStats()

    def test_malformed_line_counted(self, tmp_path, en_lexicon):
        lines = [json.dumps({"id": f"m{i}", "text": "you idiot", "lang": "en",
                             "ts": ts(2).isoformat(), "author": "u"})
                 for i in range(9)]
        lines.insert(4, "{not json")
        path = tmp_path / "corpus.jsonl"
        self.write_corpus(path, lines)
        stats = replay_corpus(path, en_lexicon, RankedPool("en"), "key")
        assert stats.rejected_malformed == 1
        assert stats.seen == 9

    def test_unreadable_file_fatal(self, tmp_path, en_lexicon):
        with pytest.raises(OSError):
            replay_corpus(tmp_path / "missing.jsonl", en_lexicon,
                          RankedPool("en"), "key")

    def test_deterministic(self, tmp_path, en_lexicon):
        lines = [json.dumps({"id": f"m{i}", "text": "you idiot scum",
                             "lang": "en",
                             "ts": (ts(2) + timedelta(minutes=3 * i)).isoformat(),
                             "author": f"user{i}"})
                 for i in range(50)]
        path = tmp_path / "corpus.jsonl"
        self.write_corpus(path, lines)
        pools = []
        stats = []
        for _ in range(2):
            pool = RankedPool("en", capacity=10)
            stats.append(replay_corpus(path, en_lexicon, pool, "key"))
            pools.append(json.dumps(pool.snapshot(), sort_keys=True))
        assert stats[0] == stats[1]
        assert pools[0] == pools[1]

    def test_maintenance_expires_old_entries(self, tmp_path, en_lexicon):
        # toxic message early, then a quiet 3-day gap, then another toxic one:
        # the 2-minute maintenance pass must have dropped the first
        lines = [
            json.dumps({"id": "early", "text": "you idiot", "lang": "en",
                        "ts": ts(1).isoformat(), "author": "a"}),
            json.dumps({"id": "late", "text": "you idiot", "lang": "en",
                        "ts": ts(5).isoformat(), "author": "b"}),
        ]
        path = tmp_path / "corpus.jsonl"
        self.write_corpus(path, lines)
        pool = RankedPool("en")
        replay_corpus(path, en_lexicon, pool, "key")
        assert len(pool) == 1
