import math
import sys

import numpy as np
import pytest
from hypothesis import settings

from ecmm.bath import DiscretizedBath
from ecmm.dynamics import SpinBosonSystem

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

GAMMAS = (-0.2, 0.0, (math.sqrt(3.0) - 1.0) / 2.0, 0.5, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def decoupled_system(eps=1.0, delta=1.0, n_modes=1):
    bath = DiscretizedBath(np.linspace(0.5, 1.5, n_modes), np.zeros(n_modes))
    return SpinBosonSystem(eps, delta, bath)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(mod.REPORT):
        terminalreporter.write_line(line)
