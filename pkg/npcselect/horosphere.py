from __future__ import annotations

import enum
import itertools
import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .barycenter import DEFAULT_MAX_ITERS, DEFAULT_TOL, MAX_RECURSIVE_POINTS, center_of_mass
from .errors import GeometryError, InputError, UnresolvedClassificationError
from .spaces import Space
from .state import Configuration, ConvexBody, IdealPoint, SpacePoint, WeightedPoint

logger = logging.getLogger(__name__)

DEFAULT_HORIZON = 64.0
DEFAULT_CLASSIFY_TOL = 1e-6
DEFAULT_SNAP_TOL = 1e-4
# Generators whose Busemann levels differ by less than this count as touching the same horosphere.
CONTACT_TOL = 1e-9
PROJECTION_SLACK = 1e-9
MONOTONE_SLACK = 1e-9


class Verdict(enum.Enum):
    SHRINKING = "Shrinking"
    NON_SHRINKING = "NonShrinking"


@dataclass(frozen=True)
class HorosphereLevel:
    ideal: IdealPoint
    level: float
    basepoint: SpacePoint


@dataclass(frozen=True)
class ShrinkClass:
    verdict: Verdict
    max_limit_separation: float
    probe_horizon: float


class LimitSeparation(NamedTuple):
    value: float
    resolved: bool


@dataclass(frozen=True)
class SelectOptions:
    horizon: float = DEFAULT_HORIZON
    classify_tol: float = DEFAULT_CLASSIFY_TOL
    snap_tol: float = DEFAULT_SNAP_TOL
    smoothing: bool = True
    tol: float = DEFAULT_TOL
    max_iters: int = DEFAULT_MAX_ITERS
    max_points: int = MAX_RECURSIVE_POINTS


def probe_schedule(horizon: float) -> list[float]:
    """
    Geometric probe times 1, 2, 4, ... ending exactly at the horizon.
    """
    if not horizon > 0:
        raise InputError("horizon", f"must be positive, got {horizon!r}")
    times = []
    s = 1.0
    while s < horizon:
        times.append(s)
        s *= 2.0
    times.append(float(horizon))
    return times


def first_horosphere(space: Space, C: ConvexBody, xi: IdealPoint,
                     o: SpacePoint) -> tuple[HorosphereLevel, list[SpacePoint]]:
    """
    The first horosphere met by the body when horoballs {b <= t} grow from t = -inf, and the generators touching it.
    """
    levels = [space.busemann(xi, o, g) for g in C]
    first = min(levels)
    contact = [g for g, b in zip(C, levels) if b - first <= CONTACT_TOL]
    return HorosphereLevel(xi, first, o), contact


def project_to_level(space: Space, x: SpacePoint, xi: IdealPoint, o: SpacePoint, t: float) -> SpacePoint:
    """
    Slides x along its ray toward xi until it reaches the horosphere b = t. Only moves toward xi.
    """
    current = space.busemann(xi, o, x)
    if t > current + PROJECTION_SLACK:
        raise InputError("level", f"level {t!r} lies above the point's level {current!r}")
    return space.ray_point(x, xi, max(current - t, 0.0))


def separation_probes(space: Space, x: SpacePoint, y: SpacePoint, xi: IdealPoint,
                      horizon: float = DEFAULT_HORIZON) -> list[tuple[float, float]]:
    """
    Distance between the rays from x and y toward xi at each probe time.
    Raises GeometryError if the sequence increases, which rays to a common ideal point never do.
    """
    probes = []
    previous = space.distance(x, y)
    for s in probe_schedule(horizon):
        value = space.ray_separation(x, y, xi, s)
        if value > previous + MONOTONE_SLACK * max(1.0, previous):
            raise GeometryError(f"ray separation grew from {previous!r} to {value!r} at s={s}")
        probes.append((s, value))
        previous = value
    return probes


def limit_separation(space: Space, x: SpacePoint, y: SpacePoint, xi: IdealPoint,
                     horizon: float = DEFAULT_HORIZON, tol: float = DEFAULT_CLASSIFY_TOL) -> LimitSeparation:
    """
    Estimates d_p(x, y) = lim d(x(s), y(s)) along the rays toward xi.
    Resolved when the last probe is below tol (limit 0) or has stopped moving by more than tol.
    """
    probes = separation_probes(space, x, y, xi, horizon)
    value = probes[-1][1]
    previous = probes[-2][1] if len(probes) > 1 else space.distance(x, y)
    return LimitSeparation(value, value < tol or abs(value - previous) < tol)


def classify_body(space: Space, C: ConvexBody, xi: IdealPoint, horizon: float = DEFAULT_HORIZON,
                  tol: float = DEFAULT_CLASSIFY_TOL, o: Optional[SpacePoint] = None) -> ShrinkClass:
    """
    Classifies the projection C' of the body onto its first horosphere as shrinking (all rays toward xi merge in the
    limit) or not. The projection does not depend on the basepoint, which defaults to the space's own.
    """
    base = o if o is not None else space.basepoint()
    level, _ = first_horosphere(space, C, xi, base)
    projected = [project_to_level(space, g, xi, base, level.level) for g in C]
    return _classify_projected(space, projected, xi, horizon, tol)


def _classify_projected(space: Space, points: list[SpacePoint], xi: IdealPoint, horizon: float,
                        tol: float) -> ShrinkClass:
    worst = 0.0
    for x, y in itertools.combinations(points, 2):
        sep = limit_separation(space, x, y, xi, horizon, tol)
        if not sep.resolved:
            raise UnresolvedClassificationError(
                f"limit separation of {x!r} and {y!r} unresolved at horizon {horizon}", (x, y), horizon)
        worst = max(worst, sep.value)
    verdict = Verdict.SHRINKING if worst < tol else Verdict.NON_SHRINKING
    logger.debug("classified %d projected generators: %s (max separation %.3e)", len(points), verdict.value, worst)
    return ShrinkClass(verdict, worst, probe_schedule(horizon)[-1])


def _merged(points: list[SpacePoint]) -> Configuration:
    # coincident projections are one atom carrying their combined unit masses
    masses: dict[SpacePoint, float] = {}
    for p in points:
        masses[p] = masses.get(p, 0.0) + 1.0
    return Configuration(WeightedPoint(p, m) for p, m in masses.items())


def select(space: Space, C: ConvexBody, xi: IdealPoint, o: SpacePoint,
           opts: SelectOptions = SelectOptions()) -> SpacePoint:
    """
    The selector f: convex body -> point.

    Projects the generators onto the first horosphere touching the body. If the projection shrinks in the limit
    toward xi, the touching generator is returned (the barycenter of the touching generators on a tie); otherwise
    the barycenter of the projected generators. Singletons are returned untouched, so f({x}) = x exactly.
    """
    if C.is_singleton:
        return C.generators[0]
    level, contact = first_horosphere(space, C, xi, o)
    projected = [project_to_level(space, g, xi, o, level.level) for g in C]
    shrink = _classify_projected(space, projected, xi, opts.horizon, opts.classify_tol)
    if shrink.verdict is Verdict.SHRINKING:
        if len(contact) == 1:
            chosen = contact[0]
        else:
            chosen = center_of_mass(space, _merged(contact), opts.tol, opts.max_iters, opts.max_points).center
    else:
        chosen = center_of_mass(space, _merged(projected), opts.tol, opts.max_iters, opts.max_points).center
    if opts.smoothing:
        chosen = snap_singular(space, chosen, opts.snap_tol)
    return chosen


def snap_singular(space: Space, x: SpacePoint, snap_tol: float = DEFAULT_SNAP_TOL) -> SpacePoint:
    """
    Makes the selector locally constant around singular points: anything within snap_tol of a branch vertex is
    moved onto it. The identity in smooth spaces.
    """
    near = space.branch_vertices_near(x, snap_tol)
    if not near:
        return x
    distance, vertex = near[0]
    logger.debug("snapped %r onto branch vertex %r (%.3e away)", x, vertex, distance)
    return vertex
