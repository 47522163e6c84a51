import sys

import pytest

from helpers import cohort_of, person


@pytest.fixture
def make_person():
    return person


@pytest.fixture
def make_cohort():
    return cohort_of


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(acceptance.RESULTS, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
        terminalreporter.write_line(line)
