from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

# PASS/FAIL lines recorded by the acceptance tests; replayed after the run
# so they survive output capture.
ACCEPTANCE_LINES: list = []


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
