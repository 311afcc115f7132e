import math

import numpy as np
import pytest

from superscar.cylinders import detect_cylinder
from superscar.polygon import triangle_from_angles, unfold, unit_square


@pytest.fixture(scope="session")
def square_surface():
    return unfold(unit_square())


@pytest.fixture(scope="session")
def octagon_surface():
    return unfold(triangle_from_angles([(1, 8), (3, 8), (1, 2)]))


@pytest.fixture(scope="session")
def diagonal_cylinder(square_surface):
    return detect_cylinder(square_surface, (1, 1), label="(1,1)")


@pytest.fixture(scope="session")
def xi_target():
    return np.array([1.0, math.sqrt(2)]) / math.sqrt(3)
