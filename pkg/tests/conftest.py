import numpy as np
import pytest

from volterra_cz import SpatialSpace, StepFunction, TimeGrid


def scalar_step(values, n_min=0, r=2.0):
    values = np.asarray(values, dtype=float)
    return StepFunction(TimeGrid(n_min, len(values)), SpatialSpace(1, r), values)


def random_step(seed, N=64, m=1, n_min=None, r=2.0, density=0.5, amplitude=1.0):
    rng = np.random.default_rng(seed)
    if n_min is None:
        n_min = -int(np.log2(N))
    values = amplitude * rng.normal(size=(N, m))
    values[rng.random(N) >= density] = 0.0
    return StepFunction(TimeGrid(n_min, N), SpatialSpace(m, r), values)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
