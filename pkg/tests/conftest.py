import numpy as np
import pytest

from ckdv import SolitonSpec, make_grid, make_perturbation, soliton_state

DEFAULT_L = 40.0 * np.pi
DEFAULT_N = 512


@pytest.fixture(scope="session")
def grid():
    return make_grid(DEFAULT_L, DEFAULT_N)


@pytest.fixture(scope="session")
def fine_grid():
    return make_grid(DEFAULT_L, 1024)


@pytest.fixture(scope="session")
def trig_grid():
    return make_grid(2.0 * np.pi, 64)


@pytest.fixture(scope="session")
def soliton(grid):
    return soliton_state(SolitonSpec(1.0), grid, 2)


def random_smooth_state(grid, seed, delta=1.0, mode="mixed"):
    """Shared generator for smooth, decayed, band-limited test states."""
    return make_perturbation(grid, 2, delta, seed, mode)
