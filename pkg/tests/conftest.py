import numpy as np
import pytest

from clfetc import (acc_backstepping, homogeneous_planar, relay_1d, zeno_polar)


@pytest.fixture(scope="session")
def acc():
    return acc_backstepping()


@pytest.fixture(scope="session")
def homog():
    return homogeneous_planar()


@pytest.fixture(scope="session")
def relay():
    return relay_1d()


@pytest.fixture(scope="session")
def zeno():
    return zeno_polar(r_star=0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(42)
