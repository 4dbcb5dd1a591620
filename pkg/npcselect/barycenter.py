from __future__ import annotations

import logging

from .errors import ConvergenceError, InputError
from .spaces import Space, make_rng
from .state import BarycenterResult, Configuration, SpacePoint, WeightedPoint

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITERS = 200
# The leave-one-out recursion costs roughly n! two-point centers per step.
MAX_RECURSIVE_POINTS = 7


def two_point_center(space: Space, a: WeightedPoint, b: WeightedPoint, check: bool = True) -> SpacePoint:
    """
    The point on the geodesic from a to b splitting it in the ratio m_b : m_a, so the heavier mass attracts the center.
    Arguments are put in a canonical order first, which makes the result bit-identical under swapping.
    """
    if check:
        space.validate(a.point)
        space.validate(b.point)
    first, second = sorted((a, b), key=lambda w: (w.mass, w.point.sort_key()))
    t = second.mass / (first.mass + second.mass)
    return space.geodesic_point(first.point, second.point, t, check=False)


def config_diameter(space: Space, X: Configuration) -> float:
    if len(X) == 1:
        return 0.0
    points = X.points
    return float(space.distance_matrix(points, points).max())


def leave_one_out_step(space: Space, X: Configuration, tol: float = DEFAULT_TOL,
                       max_iters: int = DEFAULT_MAX_ITERS) -> Configuration:
    """
    One round of the construction: every x_i is paired with the center c_i of the other n-1 points, which carries
    their whole mass M - m_i, and replaced by the two-point center of the pair.
    The new point gets the averaged mass (M - m_i)/(n - 1); the masses still sum to M.
    """
    n = len(X)
    if n < 3:
        raise InputError("points", f"a leave-one-out step needs at least 3 points, got {n}")
    total = X.total_mass
    items = []
    for i, item in enumerate(X):
        complement = _center(space, X.without(i), tol, max_iters).center
        moved = two_point_center(space, item, WeightedPoint(complement, total - item.mass), check=False)
        items.append(WeightedPoint(moved, (total - item.mass) / (n - 1)))
    return Configuration(items)


def center_of_mass(space: Space, X: Configuration, tol: float = DEFAULT_TOL, max_iters: int = DEFAULT_MAX_ITERS,
                   max_points: int = MAX_RECURSIVE_POINTS) -> BarycenterResult:
    """
    Iterates leave_one_out_step until the configuration diameter drops below tol.

    Singletons and pairs are closed-form (0 iterations). The returned center is the first point of the final
    configuration; all of its points lie within tol of each other.
    Raises ConvergenceError, carrying the partial result, if max_iters steps do not suffice.
    """
    if not tol > 0:
        raise InputError("tol", f"must be positive, got {tol!r}")
    if max_iters < 1:
        raise InputError("max_iters", f"must be positive, got {max_iters!r}")
    if len(X) > max_points:
        raise InputError("points", f"{len(X)} points exceed the recursion cap of {max_points}")
    for p in X.points:
        space.validate(p)
    return _center(space, X, tol, max_iters)


def _center(space: Space, X: Configuration, tol: float, max_iters: int) -> BarycenterResult:
    n = len(X)
    if n == 1:
        return BarycenterResult(X[0].point, 0, (0.0,), True)
    diameter = config_diameter(space, X)
    if diameter == 0.0:
        return BarycenterResult(X[0].point, 0, (0.0,), True)
    if n == 2:
        return BarycenterResult(two_point_center(space, X[0], X[1], check=False), 0, (diameter, 0.0), True)

    trace = [diameter]
    current = X
    iterations = 0
    while trace[-1] >= tol:
        if iterations == max_iters:
            partial = BarycenterResult(current[0].point, iterations, tuple(trace), False)
            raise ConvergenceError(f"{n}-point center not within {tol:g} after {max_iters} iterations "
                                   f"(diameter {trace[-1]:.3e})", partial)
        current = leave_one_out_step(space, current, tol, max_iters)
        iterations += 1
        trace.append(config_diameter(space, current))
        logger.debug("n=%d iteration %d diameter %.3e", n, iterations, trace[-1])
    return BarycenterResult(current[0].point, iterations, tuple(trace), True)


def hull_sample(space: Space, X: Configuration, depth: int, seed: int, per_round: int = 16) -> list[SpacePoint]:
    """
    Samples the convex hull of X by `depth` rounds of geodesic interpolation between randomly chosen earlier samples
    (generators included). Returns only the generated points.
    """
    if len(X) < 2:
        raise InputError("points", "hull sampling needs at least 2 points")
    if depth < 1:
        raise InputError("depth", f"must be positive, got {depth!r}")
    rng = make_rng(seed)
    pool = list(X.points)
    samples: list[SpacePoint] = []
    for _ in range(depth):
        fresh = []
        for _ in range(per_round):
            i, j = rng.integers(len(pool), size=2)
            fresh.append(space.geodesic_point(pool[int(i)], pool[int(j)], float(rng.random()), check=False))
        pool.extend(fresh)
        samples.extend(fresh)
    return samples
