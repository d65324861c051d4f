import numpy as np
import pytest
from hypothesis import settings

from eulervortex import discretize, make_domain

settings.register_profile("default", deadline=None, max_examples=30)
settings.load_profile("default")


@pytest.fixture(scope="session")
def unit_disc():
    return make_domain("disc", R=1.0)


@pytest.fixture(scope="session")
def disc_grid_64(unit_disc):
    return discretize(unit_disc, 1 / 64)


@pytest.fixture(scope="session")
def disc_grid_100(unit_disc):
    return discretize(unit_disc, 0.01)


@pytest.fixture(scope="session")
def annulus_grid():
    return discretize(make_domain("annulus", rho_in=0.5, R_out=1.0), 0.005)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
