"""Shared pytest plumbing for the suite.

The acceptance tests record a one-line verdict per criterion; the hook
below replays them in a dedicated section of the terminal summary so the
pass/fail lines survive pytest's output capture.
"""

import pytest

_VERDICTS = []


@pytest.fixture
def verdict():
    """Record and assert a single acceptance verdict line."""

    def _record(num: int, name: str, ok: bool, detail: str):
        line = f"C{num:<2} {name}: {'PASS' if ok else 'FAIL'} ({detail})"
        _VERDICTS.append(line)
        print(line)
        assert ok, line

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _VERDICTS:
        terminalreporter.section("acceptance verdicts")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
