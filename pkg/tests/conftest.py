import math

import numpy as np
import pytest

from djcm.hilbert import FockSpace
from djcm.model import default_space, params_from_free, standard_params

BETA = math.sqrt(8.0)


@pytest.fixture(scope="session")
def driven():
    return params_from_free(0.4, 0.9, 1.0, 0.7, 0.2)


@pytest.fixture(scope="session")
def standard():
    return standard_params(0.4, 0.9, 1.0)


@pytest.fixture(scope="session")
def space(driven):
    return default_space(driven, BETA)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def small_space(dim=12):
    return FockSpace(dim)
