import numpy as np
import pytest

from nodelab.grids import Grid
from nodelab.states import harmonic_eigenstate, vortex_state


@pytest.fixture(scope="session")
def grid_1d():
    return Grid((512,), ((-10.0, 10.0),))


@pytest.fixture(scope="session")
def grid_1d_coarse():
    return Grid((256,), ((-10.0, 10.0),))


@pytest.fixture(scope="session")
def grid_2d():
    # odd point count keeps the origin off-grid, so vortex cores never
    # land exactly on a sample
    return Grid((257, 257), ((-6.0, 6.0), (-6.0, 6.0)))


@pytest.fixture(scope="session")
def ho_ground(grid_1d):
    return harmonic_eigenstate(grid_1d, 0)


@pytest.fixture(scope="session")
def vortex(grid_2d):
    return vortex_state(grid_2d, 1)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260810)
