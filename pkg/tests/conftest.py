import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_CRITERIA: dict[str, str] = {}


@pytest.fixture
def criterion():
    """Record one acceptance line ``C<n> PASS|FAIL detail`` and return the flag."""

    def record(label: str, ok: bool, detail: str) -> bool:
        _CRITERIA[label] = f"{label:>3} {'PASS' if ok else 'FAIL'}  {detail}"
        print(_CRITERIA[label])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_CRITERIA, key=lambda s: int(s[1:])):
        terminalreporter.write_line(_CRITERIA[label])
