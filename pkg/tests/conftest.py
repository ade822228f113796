"""Shared fixtures: the expensive continuation objects are solved once per
session and reused across test modules."""

from math import sqrt

import pytest

from frontlab import continuation as ct


@pytest.fixture(scope="session")
def grid():
    return ct.Grid()


@pytest.fixture(scope="session")
def transition_delta0(grid):
    return ct.find_transition(0.0, grid)


@pytest.fixture(scope="session")
def transition_delta2_01(grid):
    return ct.find_transition(sqrt(0.1), grid)


@pytest.fixture(scope="session")
def pushed_04_delta0(grid):
    return ct.solve_pushed(0.4, 0.0, grid)


@pytest.fixture(scope="session")
def pulled_1_delta0(grid):
    return ct.solve_pulled(1.0, 0.0, grid)


@pytest.fixture(scope="session")
def pulled_05_delta0(grid):
    return ct.solve_pulled(0.5, 0.0, grid)
