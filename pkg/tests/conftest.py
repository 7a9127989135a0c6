import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bodyschema import kinematics as kin

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_table(rng, n_joints=7):
    """Arm-sized random DH table (links up to 0.2 m)."""
    params = np.column_stack([
        rng.uniform(-0.2, 0.2, n_joints),
        rng.uniform(-0.2, 0.2, n_joints),
        rng.uniform(-np.pi, np.pi, n_joints),
        rng.uniform(-np.pi, np.pi, n_joints),
    ])
    return kin.DhTable(params)


def random_rotation(rng):
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed in the terminal summary
acceptance_lines = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)
