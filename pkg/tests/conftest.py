import numpy as np
import pytest

from adaptnet.signal_model import NodeProfile
from adaptnet.evo.payoff import UtilityMatrix2

SPECTRUM = (2.0,) * 5


def profiles_for(variances, mu=0.01, spectrum=SPECTRUM):
    return [NodeProfile(float(s), mu, spectrum) for s in variances]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def u1234():
    return UtilityMatrix2(1.0, 2.0, 3.0, 4.0)


# one "PASS/FAIL criterion k: ..." line per acceptance criterion, repeated at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
