import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import qtypical as qt


@pytest.fixture(scope="session")
def free_h():
    return qt.Hamiltonian("free")


@pytest.fixture(scope="session")
def small_grid():
    return qt.Grid.centered(256, 64.0)


@pytest.fixture(scope="session")
def packet(small_grid):
    return qt.make_gaussian_packet(small_grid, 0.0, 0.0, 1.0)


@pytest.fixture(scope="session")
def crossing_setup():
    """Mid-size crossing scenario shared by overlap/branching tests."""
    grid = qt.Grid.centered(2048, 160.0)
    h = qt.Hamiltonian("free")
    minus = qt.make_gaussian_packet(grid, -8.0, 2.5, 1.0)
    plus = qt.make_gaussian_packet(grid, 8.0, -2.5, 1.0)
    psi0 = (minus + plus).normalized()
    s1 = qt.CSet(0.0, qt.Region.left_of(grid, 0.0))
    times = np.linspace(0.0, 10.0, 40)
    return grid, h, psi0, s1, times


@pytest.fixture(scope="session")
def separating_setup():
    grid = qt.Grid.centered(2048, 160.0)
    h = qt.Hamiltonian("free")
    minus = qt.make_gaussian_packet(grid, -4.0, -2.5, 1.0)
    plus = qt.make_gaussian_packet(grid, 4.0, 2.5, 1.0)
    psi0 = (minus + plus).normalized()
    s1 = qt.CSet(0.0, qt.Region.left_of(grid, 0.0))
    times = np.linspace(0.0, 10.0, 40)
    return grid, h, psi0, s1, times
