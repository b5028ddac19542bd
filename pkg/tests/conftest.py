from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from twistfission.exponents import normalize
from twistfission.stokes import irregular_class

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def p1h(n: int, k: int):
    return irregular_class((normalize({F(k, 2): 1}), n))


@pytest.fixture
def airy():
    return irregular_class((normalize({F(3, 2): 2}), 1))


@pytest.fixture
def cuberoot():
    return irregular_class((normalize({F(1, 3): 1}), 1))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
