import pytest

from lbforge.lattice import PRESETS
from lbforge.solver import solve

# filled by test_acceptance.py, printed once at the end of the session
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def d2v33():
    return solve(PRESETS["d2v33"]).solutions[0].model


@pytest.fixture(scope="session")
def d3v95():
    return solve(PRESETS["d3v95"]).solutions[0].model


@pytest.fixture(scope="session")
def solved_models(d2v33, d3v95):
    return {"d2v33": d2v33, "d3v95": d3v95}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
