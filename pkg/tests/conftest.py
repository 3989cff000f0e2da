from fractions import Fraction
from pathlib import Path

import pytest

from twosided.io import load_market
from twosided.valuations import Valuation

ROOT = Path(__file__).resolve().parent.parent
EX1_PATH = ROOT / "markets" / "ex1.json"

V1 = Valuation.xos([[0, 4], [8, 0], [7, 2]])
V2 = Valuation.xos([[1, 6]])
ZERO = Valuation.additive([0, 0])


@pytest.fixture
def ex1():
    return load_market(EX1_PATH)


def half() -> Fraction:
    return Fraction(1, 2)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.summary_lines():
        terminalreporter.write_line(line)
