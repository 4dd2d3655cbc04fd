import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hwlaw.quadrature import QuadratureConfig

settings.register_profile(
    "default", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# Theta at (r, t) from Yor's formula evaluated with mpmath at 40 digits
THETA_GOLDEN = {
    (1.0, 1.0): 0.739076531303232,
    (2.0, 0.5): 4.0453290901483,
    (0.5, 2.0): 0.221266435124419,
}


@pytest.fixture
def cfg():
    return QuadratureConfig(abs_tol=1e-13, rel_tol=1e-11)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
