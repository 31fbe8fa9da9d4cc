import pytest

from charsum import classical
from charsum.config import reset_budgets

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(autouse=True)
def _fresh_budgets():
    reset_budgets()
    yield
    reset_budgets()


@pytest.fixture
def corrupted_kloosterman(monkeypatch):
    """Swap in a memo where the table mod 7 has one wrong entry."""
    tables = {}
    monkeypatch.setattr(classical, "_TABLES", tables)
    tab = classical.KloostermanTable(7)
    tab.base = tab.base.copy()
    tab.base[3] = 40.0
    tables[7] = tab
    return tab


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
