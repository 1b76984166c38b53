import json
import os

import pytest

from roughwall import RoughProfile, solve_cell, solve_xi

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture(scope="session")
def refinement():
    with open(os.path.join(FIXTURES, "refinement.json"), encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def default_profile():
    return RoughProfile.default()


@pytest.fixture(scope="session")
def default_cell(default_profile):
    return solve_cell(default_profile, Y=10.0, ppp=64, n2=16)


@pytest.fixture(scope="session")
def even_cell():
    return solve_cell(RoughProfile(-0.5, (0.25,)), Y=10.0, ppp=64, n2=16)


@pytest.fixture(scope="session")
def default_xi(default_cell):
    return solve_xi(default_cell, n_periods=10, Y=20.0, ppp=32, n2=8)


ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
