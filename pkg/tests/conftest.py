import pytest

from spde_engine.models.grid import TorusGrid
from spde_engine.models.problem import catalog_problem
from tests.fixtures.synthetic_fields import (
    random_field,
    smooth_corpus,
    step_field,
)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale runs (fine grids, large ensembles)")


def pytest_addoption(parser):
    parser.addoption("--slow", action="store_true", default=False, help="enable tests marked slow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--slow"):
        return
    skip_slow = pytest.mark.skip(reason="skipping slow tests; use --slow to enable")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def grid_1d():
    return TorusGrid(dim=1, points=32)


@pytest.fixture
def grid_2d():
    return TorusGrid(dim=2, points=16)


@pytest.fixture
def heat_spec():
    return catalog_problem("heat")


@pytest.fixture
def burgers_spec():
    return catalog_problem("burgers")


@pytest.fixture
def degenerate_spec():
    return catalog_problem("burgers-degenerate")


@pytest.fixture
def stochastic_spec():
    return catalog_problem("degenerate-multiplicative", modes=4)


@pytest.fixture
def noisy_field(grid_1d):
    return random_field(grid_1d, seed=7)


@pytest.fixture
def shock_field(grid_1d):
    return step_field(grid_1d, left=1.0, right=-1.0)


@pytest.fixture
def field_corpus(grid_1d):
    return smooth_corpus(grid_1d, size=6, seed=11)
