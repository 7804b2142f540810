import os

import numpy as np
import pytest

from src.domain.catalog import group_model, lie_algebra, so_generator
from src.domain.fields import Chart
from src.domain.interfaces import LoggingService
from src.domain.liealg import build_splitting

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SCHEMA_PATH = os.path.join(ROOT, "data", "scenario.schema.json")
CATALOG_DIR = os.path.join(ROOT, "data", "scenarios")


class RecordingLogger(LoggingService):
    """Collects messages instead of printing them."""

    def __init__(self):
        self.records = []

    def info(self, message: str) -> None:
        self.records.append(("info", message))

    def warning(self, message: str) -> None:
        self.records.append(("warning", message))

    def error(self, message: str) -> None:
        self.records.append(("error", message))

    def debug(self, message: str) -> None:
        self.records.append(("debug", message))


def L(n, a, b):
    return so_generator(n, a, b)


def rotation(n, a, b, angle):
    """exp(angle * L_ab)."""
    R = np.eye(n)
    c, s = np.cos(angle), np.sin(angle)
    R[a - 1, a - 1] = R[b - 1, b - 1] = c
    R[a - 1, b - 1] = s
    R[b - 1, a - 1] = -s
    return R


def rotation_strings(n, a, b, angle):
    """Expression rows of exp(angle * L_ab) for a symbolic angle."""
    rows = [["1" if i == j else "0" for j in range(n)] for i in range(n)]
    rows[a - 1][a - 1] = rows[b - 1][b - 1] = f"cos({angle})"
    rows[a - 1][b - 1] = f"sin({angle})"
    rows[b - 1][a - 1] = f"-sin({angle})"
    return rows


@pytest.fixture
def logger():
    return RecordingLogger()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def unit_square():
    return Chart.box([[0.0, 1.0], [0.0, 1.0]], 3, random_points=4)


@pytest.fixture
def unit_cube():
    return Chart.box([[0.0, 1.0]] * 3, 3, random_points=4)


@pytest.fixture
def unit_hypercube():
    return Chart.box([[0.0, 1.0]] * 4, 2, random_points=4)


@pytest.fixture
def so2_in_so3_split():
    return build_splitting(lie_algebra("so(3)"), lie_algebra("so2_in_so3"))


@pytest.fixture
def su2_plus_split():
    return build_splitting(lie_algebra("so(4)"), lie_algebra("su2_plus_in_so4"))


@pytest.fixture
def so3_in_gl3_split():
    return build_splitting(lie_algebra("gl(3)"), lie_algebra("so(3)"))


@pytest.fixture
def so3_group():
    return group_model("so(3)")


@pytest.fixture
def so4_group():
    return group_model("so(4)")


@pytest.fixture
def gl3_group():
    return group_model("gl(3)")
