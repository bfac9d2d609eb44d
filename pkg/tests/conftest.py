import pytest
from hypothesis import HealthCheck, settings

from barrier_moments import (
    cir_american_corridor,
    expvg_double_no_touch,
    gbm_double_knockout,
    vg_double_knockout,
)

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def gbm_case1():
    return gbm_double_knockout(0.1, 0.1, 1.0, 5.0, 1.3, 2.0, 1.0)


@pytest.fixture(scope="session")
def gbm_case2():
    return gbm_double_knockout(0.2, 0.2, 1.0, 5.0, 1.3, 2.0, 1.0)


@pytest.fixture(scope="session")
def vg_case1():
    return vg_double_knockout(0.2, 0.5, 8.0, 12.0, -1.0, 1.0, -0.3, 0.0, 1.0)


@pytest.fixture(scope="session")
def cir_case1():
    return cir_american_corridor(0.5, 1.0, 0.2, 0.1, 0.5, 1.5, 1.0, 1.0)


@pytest.fixture(scope="session")
def dnt_case1():
    return expvg_double_no_touch(0.5, 8.0, 12.0, 0.05, 0.05, 0.5, 2.0, 1.0, 1.0)
