import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from kmsentropy.functionals import GaussianProfile
from kmsentropy.thermal import ThermalParams

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def params():
    return ThermalParams(beta=1.0, mass=1.0)


@pytest.fixture
def profile():
    return GaussianProfile(1.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[key])
