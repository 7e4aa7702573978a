from pathlib import Path

import pytest

from fairaudit.tabular import load_csv

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"
CONFIGS = ROOT / "configs"
ADULT_CSV = DATA / "adult.csv"

MARITAL_MERGE = {
    "Married-civ-spouse": "Married",
    "Married-AF-spouse": "Married",
    "Widowed": "Unmarried",
    "Never-married": "Unmarried",
    "Divorced": "Unmarried",
    "Separated": "Unmarried",
    "Married-spouse-absent": "Unmarried",
}


@pytest.fixture(scope="session")
def adult_table():
    return load_csv(ADULT_CSV)


# one line per acceptance criterion, filled in by tests/test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
