import warnings

import numpy as np
import pytest

from holosim.errors import TemporalCoherenceWarning
from holosim.grid import make_grid
from holosim.kernels import ObjectMask
from holosim.scenarios import get_scenario, run


@pytest.fixture(scope="session")
def grid():
    return make_grid()


@pytest.fixture(scope="session")
def grating():
    return ObjectMask.grating(400e-6, 200e-6)


@pytest.fixture(scope="session")
def gaussian(grid):
    return np.exp(-grid.x**2 / (2 * (0.5e-3) ** 2)).astype(complex)


class _Runs(dict):
    """Builtin scenario results computed on first access and shared by all tests."""

    def __missing__(self, name):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TemporalCoherenceWarning)
            result = run(get_scenario(name))
        self[name] = result
        return result


@pytest.fixture(scope="session")
def runs():
    return _Runs()


def rel_l2(a, b, region=None):
    a, b = np.asarray(a), np.asarray(b)
    if region is not None:
        a, b = a[region], b[region]
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))
