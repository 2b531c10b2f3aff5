import math

import pytest

from polybilliards.geometry import Circle, Polygon, Sinai, build_table


@pytest.fixture(scope="session")
def circle():
    return build_table(Circle(1.0))


@pytest.fixture(scope="session")
def square():
    return build_table(Polygon(4, 1.0))


@pytest.fixture(scope="session")
def pentagon():
    return build_table(Polygon(5, 1.0))


@pytest.fixture(scope="session")
def sinai():
    return build_table(Sinai(1.0, 0.25))


SQRT2_2 = math.sqrt(2) / 2
