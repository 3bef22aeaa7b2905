from fractions import Fraction

import pytest

from locc_hyptest.core import TestInstance

_CRITERIA = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    _CRITERIA[number] = (passed, detail)


@pytest.fixture
def criterion():
    return record_criterion


@pytest.fixture
def fig1():
    return TestInstance.from_lambdas([0.75, 0.25], 2, 2)


@pytest.fixture
def fig1_exact():
    return TestInstance.from_lambdas([Fraction(3, 4), Fraction(1, 4)], 2, 2)


@pytest.fixture
def maxent():
    return TestInstance.from_lambdas([0.5, 0.5], 2, 2)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        passed, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if passed else 'FAIL'} - {detail}")
