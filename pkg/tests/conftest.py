import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_RESULTS = []


@pytest.fixture
def criterion():
    """Record a named pass/fail line for the end-of-run acceptance report."""

    def record(name, passed, detail=""):
        _RESULTS.append((name, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _RESULTS:
        terminalreporter.write_line(f"ACCEPTANCE {'PASS' if passed else 'FAIL'}  {name}  {detail}")
