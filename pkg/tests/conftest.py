import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pathholonomy.liealg import make_group

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def su2():
    return make_group("su2")


@pytest.fixture(scope="session")
def su3():
    return make_group("su3")


@pytest.fixture(scope="session")
def u1():
    return make_group("u1")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
