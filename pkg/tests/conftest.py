import pytest

from trscat.boundstate import bound_state
from trscat.locator import comparison_report
from trscat.potential import figure1_potential

SWEEP = (6.0, 8.0, 10.0)
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def fig1():
    return figure1_potential(M=10.0)


@pytest.fixture(scope="session")
def fig1_eta(fig1):
    return bound_state(fig1, (18.0, 21.0), L=12.0, h=0.005)


@pytest.fixture(scope="session")
def fig1_reports(fig1, fig1_eta):
    return [comparison_report(fig1_eta.with_M(M), fig1.with_M(M)) for M in SWEEP]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
