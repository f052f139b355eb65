import pytest

from rowtypes.core import Store

# one line per acceptance criterion, filled in by test_acceptance.py
REPORT = {}


@pytest.fixture
def s():
    return Store()


def pytest_terminal_summary(terminalreporter):
    if not REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(REPORT):
        terminalreporter.write_line(REPORT[n])
