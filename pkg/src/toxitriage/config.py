"""Runtime configuration for the triage service.

Everything tunable lives here: pool bounds, query budget, the severity
bonus, label-to-tone compatibility, file locations, and the shared posting
identity. The pseudonymization key is deliberately NOT part of the config
file; it comes from the environment only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import timedelta
from importlib import resources
from pathlib import Path

from .responder import DEFAULT_TONE_COMPATIBILITY


@dataclass
class AppConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    languages: tuple[str, ...] = ("en", "de", "nl")
    pool_capacity: int = 2000
    pool_window_hours: float = 48.0
    refresh_minutes: float = 2.0
    queries_per_minute: int = 3
    severity_bonus: float = 1.5
    bonus_trigger: str = "THREAT"
    bonus_partners: tuple[str, ...] = ("RACISM", "SEXISM")
    account: str = "@trollfeeders"
    tone_compatibility: dict = field(
        default_factory=lambda: {k: set(v) for k, v in
                                 DEFAULT_TONE_COMPATIBILITY.items()})
    lexicon_dir: Path | None = None
    meme_catalog: Path | None = None
    grammar_dir: Path | None = None
    tree_dir: Path | None = None
    ledger_path: Path | None = None
    api_token: str | None = None

    @property
    def pool_window(self) -> timedelta:
        return timedelta(hours=self.pool_window_hours)

    @classmethod
    def from_file(cls, path: str | Path) -> "AppConfig":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        cfg = cls()
        for key, value in doc.items():
            if not hasattr(cfg, key):
                raise ValueError(f"unknown config key {key!r}")
            if key in ("lexicon_dir", "meme_catalog", "grammar_dir",
                       "tree_dir", "ledger_path"):
                value = Path(value)
            elif key in ("languages", "bonus_partners"):
                value = tuple(value)
            elif key == "tone_compatibility":
                value = {k: set(v) for k, v in value.items()}
            setattr(cfg, key, value)
        return cfg


def bundled_data_dir() -> Path:
    return Path(str(resources.files("toxitriage.data")))
