import numpy as np
import pytest
from scipy.special import i1, j1

from translab.grids import PotentialSpec, SpaceGrid
from translab.transmute import OperatorPair


def exact_kernel(c, x):
    """Gelfand-Levitan kernel for q = c: c x I1(z)/z, z = sqrt(c (x^2 - t^2))."""
    X, T = np.meshgrid(x, x, indexing="ij")
    z = np.sqrt(np.maximum(c * (X * X - T * T), 0.0))
    safe = np.where(z > 0, z, 1.0)
    return np.tril(np.where(z > 0, c * X * i1(safe) / safe, 0.5 * c * X))


def exact_inverse_kernel(c, x):
    """Inverse kernel for q = c: -c x J1(z)/z."""
    X, T = np.meshgrid(x, x, indexing="ij")
    z = np.sqrt(np.maximum(c * (X * X - T * T), 0.0))
    safe = np.where(z > 0, z, 1.0)
    return np.tril(np.where(z > 0, -c * X * j1(safe) / safe, -0.5 * c * X))


@pytest.fixture(scope="session")
def grid():
    return SpaceGrid(8.0, 512)


@pytest.fixture(scope="session")
def const_pair(grid):
    return OperatorPair.build(PotentialSpec.zero(), PotentialSpec.constant(1.0), grid, 100.0, 512)


@pytest.fixture(scope="session")
def identity_pair(grid):
    return OperatorPair.build(PotentialSpec.zero(), PotentialSpec.zero(), grid, 100.0, 512)


_CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record one acceptance line; all lines are echoed in the terminal summary."""
    def record(n: int, ok: bool, what: str, value: str):
        _CRITERIA[n] = f"{'PASS' if ok else 'FAIL'} criterion {n:2d}: {what} [{value}]"
        assert ok, _CRITERIA[n]
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])
