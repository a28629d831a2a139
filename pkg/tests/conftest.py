import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

# (criterion id, title, passed, detail) rows from the acceptance module
ACCEPTANCE_ROWS: list[tuple[str, str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the assertion still decides the test."""

    def record(cid, title, passed, detail=""):
        ACCEPTANCE_ROWS.append((str(cid), title, bool(passed), detail))
        print(f"[{'PASS' if passed else 'FAIL'}] {cid} {title}: {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_ROWS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid, title, ok, detail in sorted(ACCEPTANCE_ROWS, key=lambda r: [int(x) if x.isdigit() else x
                                                                           for x in r[0].split(".")]):
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  {cid:<5} {title} | {detail}")
