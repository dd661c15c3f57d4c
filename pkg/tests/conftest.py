import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "rddi", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("rddi")

Z = np.array([0.0, 0.0, 1.0])
X = np.array([1.0, 0.0, 0.0])


@pytest.fixture
def sphere_small():
    from rddi import PermittivityModel, SphereGeometry

    return SphereGeometry(0.2, PermittivityModel(0.5, 0.05))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
