import numpy as np
import pytest

from irsofdm.channel import LinkGeometry
from irsofdm.reflection import DEFAULT_PARAMS, OfdmGrid


@pytest.fixture
def desk_grid():
    return OfdmGrid(n_subcarriers=16, bandwidth_hz=0.2e9, carrier_hz=2.4e9, tap_count=8, cp_length=16)


@pytest.fixture
def paper_grid():
    return OfdmGrid(n_subcarriers=64, bandwidth_hz=0.2e9, carrier_hz=2.4e9, tap_count=8, cp_length=16)


@pytest.fixture
def small_grid():
    return OfdmGrid(n_subcarriers=4, bandwidth_hz=0.2e9, carrier_hz=2.4e9, tap_count=1, cp_length=1)


@pytest.fixture
def params():
    return DEFAULT_PARAMS


@pytest.fixture
def geometry():
    return LinkGeometry()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
