import math

import numpy as np
import pytest

from cenbm.geometry import ConvexPolygon, random_convex_polygon, regular_polygon

SQRT3 = math.sqrt(3.0)

ACCEPTANCE_LINES = []


def random_polygon(i: int, base: int = 0) -> ConvexPolygon:
    """Seeded polygon drawn from 3..40 points."""
    rng = np.random.default_rng(base + i)
    return random_convex_polygon(int(rng.integers(3, 41)), seed=None, rng=rng)


def random_pair(i: int):
    rng = np.random.default_rng(100_000 + i)
    n1, n2 = rng.integers(3, 41, size=2)
    return random_convex_polygon(int(n1), None, rng), random_convex_polygon(int(n2), None, rng)


def random_affine(rng: np.random.Generator):
    from cenbm.geometry import AffineMap

    while True:
        m = rng.normal(size=(2, 2))
        if abs(np.linalg.det(m)) > 0.1:
            return AffineMap(m, rng.normal(size=2))


@pytest.fixture
def square():
    return ConvexPolygon([(0, 0), (1, 0), (1, 1), (0, 1)])


@pytest.fixture
def triangle():
    return ConvexPolygon([(0, 0), (1, 0), (0, 1)])


@pytest.fixture
def hexagon():
    return regular_polygon(6, phase=0.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
