import numpy as np
import pytest

from bdflow.discrete import make_grid
from bdflow.exact import make_barenblatt
from bdflow.viscosity import make_power_law


@pytest.fixture
def law2():
    """mu = rho^2 / 2 in one dimension, so 2 mu' = 2 rho."""
    return make_power_law(0.5, 2.0, 1)


@pytest.fixture
def barenblatt2():
    return make_barenblatt(2.0, 1, 0.5, C=1.0)


@pytest.fixture
def line_grid():
    return make_grid(256, -6.0, 6.0)


@pytest.fixture
def rng():
    return np.random.default_rng(42)
