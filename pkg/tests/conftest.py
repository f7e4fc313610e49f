import sys

import pytest

from subshiftkit.params import TOY_SCHEDULES, Schedule, compute_states
from subshiftkit.words import Hierarchy


@pytest.fixture(scope="session")
def paper_states():
    return compute_states(Schedule.paper(), 2)


@pytest.fixture(scope="session")
def toy_states():
    return {name: compute_states(s, s.max_level) for name, s in TOY_SCHEDULES.items()}


@pytest.fixture(scope="session")
def hiers(toy_states):
    return {name: Hierarchy(states) for name, states in toy_states.items()}


@pytest.fixture(scope="session")
def t1(hiers):
    return hiers["t1"]


@pytest.fixture(scope="session")
def paper_hier(paper_states):
    return Hierarchy(paper_states)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
