import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qdecide import load_scenario  # noqa: E402

ACCEPTANCE_LINES = []


def record_criterion(label, ok, detail=""):
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  ({detail})" if detail else ""))
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def umbrella_simple():
    return load_scenario("umbrella-simple").problem


@pytest.fixture(scope="session")
def umbrella_wait():
    return load_scenario("umbrella-wait").problem


@pytest.fixture(scope="session")
def jacket():
    return load_scenario("jacket-entangled").problem


@pytest.fixture(scope="session")
def bundled_problems(umbrella_simple, umbrella_wait, jacket):
    return {"umbrella-simple": umbrella_simple, "umbrella-wait": umbrella_wait, "jacket-entangled": jacket}
