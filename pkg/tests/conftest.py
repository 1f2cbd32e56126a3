import math
from pathlib import Path

import numpy as np
import pytest

from redps.bench.experiments import search_dominating
from redps.event_sets.builders import overshoot_set, two_tail_set
from redps.rate_models.gaussian import GaussianModel
from redps.rate_models.increments import NormalMinusExpSumModel
from redps.settings import settings


def pytest_configure():
    pytest.DATA_PATH = Path(__file__).parent.absolute() / "data"
    pytest.CORNER_SET_PATH = pytest.DATA_PATH / "corner_pieces.txt"
    pytest.TWO_TAIL_CONFIG_PATH = pytest.DATA_PATH / "two_tail.yaml"
    pytest.CORNER_CONFIG_PATH = pytest.DATA_PATH / "corner.yaml"

    # increments N(1.5, 1) - Exp(1) at level a = 1.5
    pytest.THETA_A = (math.sqrt(5.0) - 1.0) / 2.0
    pytest.THETA_MINUS_A = -2.0 + math.sqrt(2.0)
    pytest.RATE_A = 0.290229
    pytest.RATE_MINUS_A = 0.704411

    pytest.OVERSHOOT_A = 3.3


@pytest.fixture(autouse=True)
def clear_search_cache():
    search_dominating.clear_cache()
    yield


@pytest.fixture
def small_chunks():
    """Shrink the chunk size so short runs still span several chunks."""
    previous = settings.chunk_size
    settings.update_settings(chunk_size=1000)
    yield
    settings.update_settings(chunk_size=previous)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(12345))


@pytest.fixture
def standard_normal():
    return GaussianModel([0.0], [[1.0]])


@pytest.fixture
def two_tail():
    return two_tail_set(4.0, 2.0)


@pytest.fixture
def walk_model():
    return GaussianModel.isotropic(10, 1.0)


@pytest.fixture
def overshoot():
    return overshoot_set(10, pytest.OVERSHOOT_A)


@pytest.fixture
def increment_model():
    return NormalMinusExpSumModel(10)
