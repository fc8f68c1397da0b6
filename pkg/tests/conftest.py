import pytest

from levygreen import green, kernels, models
from levygreen.geometry import interval_union

ALPHA = 1.5


@pytest.fixture(scope="session")
def stable15():
    return models.stable_model(ALPHA)


@pytest.fixture(scope="session")
def table15(stable15):
    # moderate density is enough for interpolation-based checks in unit tests
    return kernels.build_table(stable15, diam=2.0, points_per_decade=32)


@pytest.fixture(scope="session")
def unit_interval():
    return interval_union((-1.0, 1.0))


@pytest.fixture(scope="session")
def two_interval():
    return interval_union((-1.0, -0.2), (0.2, 1.0))


@pytest.fixture(scope="session")
def oracle15(unit_interval):
    return green.stable_oracle(ALPHA, unit_interval)


@pytest.fixture(scope="session")
def numeric15(two_interval):
    return green.numeric_table_green(ALPHA, two_interval, nodes_per_component=160)
