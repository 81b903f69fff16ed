from datetime import datetime, timezone

import pytest

from toxitriage import bundled_lexicon

#: Filled by the acceptance suite; echoed after the run so the per-criterion
#: verdict lines survive pytest's output capture.
ACCEPTANCE_VERDICTS: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_VERDICTS:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def en_lexicon():
    return bundled_lexicon("en")


@pytest.fixture(autouse=True)
def pseudonym_key(monkeypatch):
    monkeypatch.setenv("TOXITRIAGE_KEY", "test-secret-key")


def ts(day: int, hour: int = 12, minute: int = 0) -> datetime:
    """Shorthand timestamp inside a fixed month."""
    return datetime(2021, 3, day, hour, minute, tzinfo=timezone.utc)
