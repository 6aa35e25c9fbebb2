import pytest

from irreducible.config import RunConfig
from irreducible.coupled import run_scenario

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def default_runs():
    """The three default 20000-unit scenario runs, computed once per session."""
    return {name: run_scenario(RunConfig(scenario=name)) for name in ("reducible", "irreducible", "swept")}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
