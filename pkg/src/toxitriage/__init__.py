"""Human-in-the-loop toxicity triage.

Scan message streams with a weighted multi-label lexicon, rank the worst
messages in bounded per-language pools, compose meme and grammar-generated
counternarratives, track moderation actions and report outcomes, and
measure engagement.
"""

from .lexicon import (Lexicon, LexiconEntry, LexiconError, MatchSpan,
                      bundled_lexicon, load_lexicon, scan, tokenize)
from .scoring import Assessment, assess, compare, rank_key
from .pool import PoolEntry, RankedPool
from .ingest import (IngestStats, Message, Query, QueryBudget, QueryMode,
                     RawMessage, TrendTopic, compose_queries, extract_trends,
                     normalize, pseudonymize, replay_corpus)
from .responder import (Grammar, GrammarStats, Meme, Response, Suggestion,
                        compose_response, expand, expansion_count,
                        load_grammar, load_memes, rank_grammars, suggest)
from .moderation import (ActionRecord, DecisionTree, Ledger, ReportRecord,
                         load_tree, walk)

__version__ = "0.1.0"
