import numpy as np
import pytest

from phiyamabe import build_grid, build_manifold


@pytest.fixture(scope="session")
def man_inhomog():
    # curvature profile -2x^2 - 3 on the collar, extremes -5 and -3
    return build_manifold(6, 2, -4.0, -3.0, 1.0)


@pytest.fixture(scope="session")
def man_homog():
    # base term cancels b(b-1): curvature identically -1
    return build_manifold(6, 2, -2.0, -1.0, 1.0)


@pytest.fixture(scope="session")
def grid_small(man_inhomog):
    return build_grid(man_inhomog, 48, 0.05, 1.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(42)
