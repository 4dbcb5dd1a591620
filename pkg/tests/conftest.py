import math

import pytest

from npcselect.spaces import EuclideanSpace, HyperbolicSpace, TreeSpace
from npcselect.state import SpacePoint

# Dyadic edge lengths keep tree arithmetic exact.
STAR_EDGES = [("A", "B", 1.0), ("B", "C", 2.0), ("B", "D", 1.0), ("D", "E", 1.0)]


@pytest.fixture
def plane():
    return EuclideanSpace(2)


@pytest.fixture
def disk():
    return HyperbolicSpace(2)


@pytest.fixture
def star():
    """
    B is a branch vertex with arms toward A and C; the ideal leaf E hangs off D on the other side.
    """
    return TreeSpace(STAR_EDGES, ideal_leaves=["E"])


@pytest.fixture(params=["euclidean", "hyperbolic", "tree"])
def space(request):
    if request.param == "euclidean":
        return EuclideanSpace(2)
    if request.param == "hyperbolic":
        return HyperbolicSpace(2)
    return TreeSpace(STAR_EDGES, ideal_leaves=["E"])


def hyperbolic_point(s, angle=0.0):
    """
    The point at distance s from the apex in direction angle.
    """
    return SpacePoint.at([math.cosh(s), math.sinh(s) * math.cos(angle), math.sinh(s) * math.sin(angle)])
