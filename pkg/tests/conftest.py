import numpy as np
import pytest

from dctfield import FieldGrid, GridSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def spec8():
    return GridSpec(0.0, 10.0, 0.0, 10.0, 8, 8)


@pytest.fixture
def spec100():
    return GridSpec(0.0, 100.0, 0.0, 100.0, 100, 100)


def random_field(spec, rng, scale=1.0):
    return FieldGrid(spec, scale * rng.normal(size=spec.shape))
