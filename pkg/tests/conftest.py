import math

import numpy as np
import pytest

from sphzeros.sphere import random_rotation, uniform_points


def tetrahedron():
    v = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    return v / math.sqrt(3.0)


def equilateral():
    ang = 2 * np.pi * np.arange(3) / 3
    return np.column_stack([np.cos(ang), np.sin(ang), np.zeros(3)])


def icosahedron():
    p = (1 + math.sqrt(5)) / 2
    v = []
    for a in (-1, 1):
        for b in (-p, p):
            v += [(0, a, b), (a, b, 0), (b, 0, a)]
    v = np.array(v, dtype=float)
    return v / np.linalg.norm(v, axis=1, keepdims=True)


ANTIPODAL = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def rotation(rng):
    return random_rotation(rng)


_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
