#!/usr/bin/env python3
"""Generate the bundled 5K synthetic corpus with a known label composition.

Deterministic by construction: 4000 toxic messages of which exactly 1000
carry RACISM (a 0.25 share), plus 1000 clean messages, split over EN/DE/NL.
The script verifies the composition against the bundled lexicons before
writing, and refreshes the golden per-language table CSV used by the tests.

Run from the repository root:  python3 scripts/make_corpus.py
"""

import json
import random
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from toxitriage import analytics, bundled_lexicon  # noqa: E402
from toxitriage.api import build_language_rows, replay_into_state  # noqa: E402
from toxitriage.config import AppConfig  # noqa: E402
from toxitriage.scoring import assess  # noqa: E402

BASE = datetime(2021, 2, 10, 0, 0, tzinfo=timezone.utc)

# (racism, other-toxic, clean) per language; totals 1000/3000/1000 = 5000
PLAN = {"en": (500, 1500, 500), "de": (300, 900, 300), "nl": (200, 600, 200)}

TEXTS = {
    "en": {
        "racism": [
            "they are filthy pigs, every single one",
            "hordes of immigrants flooding in again",
            "tell them to go back to wherever",
            "typical nazi talking point and proud of it",
        ],
        "toxic": [
            "you absolute idiot",
            "what a clown show, stupid all the way down",
            "this is bullshit and you know it",
            "fucking ridiculous take, total scum move",
            "the deep state is behind this, wake up sheeple",
            "ugly and stupid, congrats",
        ],
        "clean": [
            "lovely weather for a walk today",
            "great match last night, well played",
            "does anyone have a good pasta recipe?",
            "the new album is out, sounds great",
        ],
    },
    "de": {
        "racism": [
            "ausländer raus, sofort",
            "das sind doch alles dreckige lügner",
            "die umvolkung ist in vollem gange",
        ],
        "toxic": [
            "was für ein idiot",
            "so ein arschloch, unglaublich",
            "scheisse, diese versager schon wieder",
            "ihr seid alle schafe, wacht auf",
        ],
        "clean": [
            "schönes wetter heute in berlin",
            "das spiel gestern war klasse",
            "hat jemand einen guten buchtipp?",
        ],
    },
    "nl": {
        "racism": [
            "oprotten naar daarginds, nu meteen",
            "vieze leugenaars zijn het",
            "de omvolking is echt bezig",
        ],
        "toxic": [
            "wat een idioot zeg",
            "klootzak, echt belachelijk dit",
            "stelletje schapen, word wakker",
            "die sukkel snapt er niks van",
        ],
        "clean": [
            "lekker weer vandaag in utrecht",
            "mooie wedstrijd gisteren",
            "iemand een tip voor een goed boek?",
        ],
    },
}


def build_messages():
    rng = random.Random(20210210)
    slots = []
    for lang, (racism, toxic, clean) in PLAN.items():
        slots += [(lang, "racism")] * racism
        slots += [(lang, "toxic")] * toxic
        slots += [(lang, "clean")] * clean
    rng.shuffle(slots)
    messages = []
    for i, (lang, kind) in enumerate(slots):
        text = rng.choice(TEXTS[lang][kind])
        messages.append({
            "id": f"msg-{i:05d}",
            "text": text,
            "lang": lang,
            "ts": (BASE + timedelta(seconds=20 * i)).isoformat(),
            "author": f"user_{i % 97:02d}",
            "_kind": kind,
        })
    return messages


def verify(messages):
    lexicons = {lang: bundled_lexicon(lang) for lang in PLAN}
    toxic = racism = 0
    for m in messages:
        a = assess(m["text"], lexicons[m["lang"]], m["id"])
        is_toxic = a.score > 0
        want_toxic = m["_kind"] != "clean"
        assert is_toxic == want_toxic, (m, sorted(a.labels))
        has_racism = "RACISM" in a.labels
        want_racism = m["_kind"] == "racism"
        assert has_racism == want_racism, (m, sorted(a.labels))
        toxic += is_toxic
        racism += has_racism
    assert toxic == 4000 and racism == 1000, (toxic, racism)


def main():
    messages = build_messages()
    verify(messages)
    out = ROOT / "src/toxitriage/data/corpus_5k.jsonl"
    with open(out, "w", encoding="utf-8") as fh:
        for m in messages:
            doc = {k: v for k, v in m.items() if not k.startswith("_")}
            fh.write(json.dumps(doc, ensure_ascii=False) + "\n")
    print(f"wrote {out} ({len(messages)} messages)")

    # refresh the golden per-language table
    from toxitriage.api import default_state
    state = default_state(AppConfig())
    replay_into_state(state, out, key="golden-fixture-key")
    csv_text, _ = analytics.language_table(build_language_rows(state))
    golden = ROOT / "tests/data/golden_language_table.csv"
    golden.parent.mkdir(parents=True, exist_ok=True)
    golden.write_text(csv_text, encoding="utf-8")
    print(f"wrote {golden}")


if __name__ == "__main__":
    main()
