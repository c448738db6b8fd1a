import numpy as np
import pytest

from nlslab.catalog import SolutionKind, ExactSolution
from nlslab.grid import Field1D, Grid1D


@pytest.fixture(scope="session")
def sy():
    return ExactSolution(SolutionKind.SATSUMA_YAJIMA)


@pytest.fixture(scope="session")
def km():
    return ExactSolution(SolutionKind.KUZNETSOV_MA, a=1.0)


@pytest.fixture(scope="session")
def grid20():
    return Grid1D(20.0, 2048)


@pytest.fixture
def gaussian():
    def make(grid, amplitude=1.0, width=1.0, k0=0.0):
        x = grid.x
        return Field1D(grid, amplitude * np.exp(-(x / width) ** 2 + 1j * k0 * x))
    return make


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("[")[1].split("]")[0])):
            terminalreporter.write_line(line)
