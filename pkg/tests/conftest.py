import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from msbudget.model import parse_application  # noqa: E402

DATA = Path(__file__).resolve().parents[1] / "src" / "msbudget" / "data"


@pytest.fixture(scope="session")
def doc_a():
    return json.loads((DATA / "flight_booking_a.json").read_text())


@pytest.fixture(scope="session")
def doc_b():
    return json.loads((DATA / "flight_booking_b.json").read_text())


@pytest.fixture(scope="session")
def app_a(doc_a):
    return parse_application(doc_a)


@pytest.fixture(scope="session")
def app_b(doc_b):
    return parse_application(doc_b)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", "call") != "call" and outcome != "error":
                continue
            if "test_acceptance.py::" in rep.nodeid:
                lines.append((rep.nodeid.split("::")[-1], "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, status in sorted(lines):
            terminalreporter.write_line(f"{status}  {name}")
