from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .barycenter import DEFAULT_MAX_ITERS, center_of_mass, config_diameter
from .errors import ConvergenceError, InputError, InvalidPointError, UnresolvedClassificationError
from .horosphere import DEFAULT_CLASSIFY_TOL, DEFAULT_HORIZON, DEFAULT_SNAP_TOL, SelectOptions, select
from .spaces import Space, TreeSpace, make_rng
from .state import Configuration, ConvexBody, IdealPoint, SpacePoint, WeightedPoint

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 100
DEFAULT_EPSILON = 1e-3
DEFAULT_SCALE = 2.0
# Scans measure center displacements of order epsilon, so centers are computed well below it.
DEFAULT_SCAN_TOL = 1e-12
MASS_RANGE = (0.5, 2.0)
STRADDLE_HALVINGS = 4
DIVERGENCE_FACTOR = 2.0
GROWTH_SLACK = 1e-6
STRADDLE_BAND = 4.0

FAILED = "failed"
SKIPPED = "skipped"

Outcome = Union["LipschitzRecord", str]


@dataclass(frozen=True)
class ScanParams:
    space: Space
    n_points: int = 3
    samples: int = DEFAULT_SAMPLES
    epsilon: float = DEFAULT_EPSILON
    seed: int = 0
    tol: float = DEFAULT_SCAN_TOL
    max_iters: int = DEFAULT_MAX_ITERS
    smoothing: bool = True
    ideal: Optional[IdealPoint] = None
    scale: float = DEFAULT_SCALE
    snap_tol: float = DEFAULT_SNAP_TOL
    horizon: float = DEFAULT_HORIZON
    classify_tol: float = DEFAULT_CLASSIFY_TOL
    workers: int = 1

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise InputError("samples", f"must be at least 1, got {self.samples!r}")
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise InputError("epsilon", f"must be positive, got {self.epsilon!r}")
        if self.n_points < 1:
            raise InputError("n_points", f"must be at least 1, got {self.n_points!r}")
        if self.workers < 1:
            raise InputError("workers", f"must be at least 1, got {self.workers!r}")

    def select_options(self) -> SelectOptions:
        return SelectOptions(horizon=self.horizon, classify_tol=self.classify_tol, snap_tol=self.snap_tol,
                             smoothing=self.smoothing, tol=self.tol, max_iters=self.max_iters)


@dataclass(frozen=True)
class LipschitzRecord:
    sample: int
    in_disp: float
    out_disp: float
    ratio: float


@dataclass(frozen=True)
class StraddleReport:
    """
    Selector ratios on a family of bodies straddling a branch vertex, one per epsilon.
    `diverging` is set when every halving of epsilon at least doubles the ratio.
    """
    epsilons: tuple[float, ...]
    ratios: tuple[float, ...]
    smoothing: bool

    @property
    def growth(self) -> tuple[float, ...]:
        return tuple(_growth(a, b) for a, b in zip(self.ratios, self.ratios[1:]))

    @property
    def diverging(self) -> bool:
        return bool(self.growth) and all(g >= DIVERGENCE_FACTOR * (1.0 - GROWTH_SLACK) for g in self.growth)

    @property
    def spread(self) -> float:
        hi, lo = max(self.ratios), min(self.ratios)
        if hi == lo:
            return 1.0
        return hi / lo if lo > 0 else math.inf

    @property
    def bounded(self) -> bool:
        return self.spread <= STRADDLE_BAND


def _growth(before: float, after: float) -> float:
    if before == 0.0:
        return 1.0 if after == 0.0 else math.inf
    return after / before


@dataclass(frozen=True)
class LipschitzReport:
    records: tuple[LipschitzRecord, ...]
    failures: int = 0
    skipped: int = 0
    straddle: Optional[StraddleReport] = None

    @property
    def ratios(self) -> list[float]:
        return [r.ratio for r in self.records]

    @property
    def max_ratio(self) -> Optional[float]:
        return max(self.ratios) if self.records else None

    @property
    def mean_ratio(self) -> Optional[float]:
        return math.fsum(self.ratios) / len(self.records) if self.records else None

    def summary(self) -> str:
        if not self.records:
            return f"samples=0 failures={self.failures} skipped={self.skipped}"
        return (f"samples={len(self.records)} max_ratio={self.max_ratio:.6g} mean_ratio={self.mean_ratio:.6g} "
                f"failures={self.failures} skipped={self.skipped}")


def hausdorff(space: Space, A: ConvexBody, B: ConvexBody) -> float:
    """
    Hausdorff distance between the generator sets of A and B. It bounds the distance between the hulls.
    """
    for g in (*A, *B):
        space.validate(g)
    D = space.distance_matrix(list(A), list(B))
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def draw_configuration(space: Space, rng: np.random.Generator, n: int, scale: float) -> Configuration:
    points = [space.random_point(int(rng.integers(1 << 62)), scale) for _ in range(n)]
    masses = rng.uniform(*MASS_RANGE, size=n)
    return Configuration.of(points, [float(m) for m in masses])


def point_shift_record(space: Space, X: Configuration, k: int, moved: SpacePoint, sample: int = 0,
                       tol: float = DEFAULT_SCAN_TOL, max_iters: int = DEFAULT_MAX_ITERS) -> Outcome:
    in_disp = space.distance(X[k].point, moved)
    if in_disp == 0.0:
        return SKIPPED
    shifted = X.replace(k, WeightedPoint(moved, X[k].mass))
    c = center_of_mass(space, X, tol, max_iters).center
    c2 = center_of_mass(space, shifted, tol, max_iters).center
    out = space.distance(c, c2)
    return LipschitzRecord(sample, in_disp, out, out / in_disp)


def mass_shift_record(space: Space, X: Configuration, k: int, delta: float, sample: int = 0,
                      tol: float = DEFAULT_SCAN_TOL, max_iters: int = DEFAULT_MAX_ITERS) -> Outcome:
    """
    Center displacement after adding delta to the k-th mass, normalized by |delta| * diam(X) / M.
    """
    if X[k].mass + delta <= 0:
        raise InputError("delta", f"mass {X[k].mass!r} + {delta!r} is not positive")
    in_disp = abs(delta) * config_diameter(space, X) / X.total_mass
    if in_disp == 0.0:
        return SKIPPED
    changed = X.replace(k, X[k].with_mass(X[k].mass + delta))
    c = center_of_mass(space, X, tol, max_iters).center
    c2 = center_of_mass(space, changed, tol, max_iters).center
    out = space.distance(c, c2)
    return LipschitzRecord(sample, in_disp, out, out / in_disp)


def selector_record(space: Space, C: ConvexBody, C2: ConvexBody, xi: IdealPoint, o: SpacePoint,
                    opts: SelectOptions, sample: int = 0) -> Outcome:
    in_disp = hausdorff(space, C, C2)
    if in_disp == 0.0:
        return SKIPPED
    out = space.distance(select(space, C, xi, o, opts), select(space, C2, xi, o, opts))
    return LipschitzRecord(sample, in_disp, out, out / in_disp)


def _run(params: ScanParams, one: Callable[[int], Outcome], name: str) -> tuple[list[LipschitzRecord], int, int]:
    def attempt(sample: int) -> Outcome:
        try:
            return one(sample)
        except (ConvergenceError, UnresolvedClassificationError) as err:
            logger.warning("%s sample %d failed: %s", name, sample, err)
            return FAILED

    ids = range(params.samples)
    if params.workers > 1:
        with ThreadPoolExecutor(max_workers=params.workers) as pool:
            outcomes = list(pool.map(attempt, ids))
    else:
        outcomes = [attempt(i) for i in ids]

    records = [o for o in outcomes if isinstance(o, LipschitzRecord)]
    failures = sum(1 for o in outcomes if o == FAILED)
    skipped = sum(1 for o in outcomes if o == SKIPPED)
    return records, failures, skipped


def _finish(name: str, records: list[LipschitzRecord], failures: int, skipped: int,
            straddle: Optional[StraddleReport] = None) -> LipschitzReport:
    report = LipschitzReport(tuple(records), failures, skipped, straddle)
    logger.info("%s: %s", name, report.summary())
    return report


def point_shift_scan(params: ScanParams) -> LipschitzReport:
    """
    Moves one point of a random configuration by a geodesic step of length epsilon and records
    d(center, center') / d(x_k, x_k').
    """
    if params.n_points < 2:
        raise InputError("n_points", "a point-shift scan needs at least 2 points")
    space = params.space

    def one(sample: int) -> Outcome:
        rng = make_rng(params.seed ^ sample)
        X = draw_configuration(space, rng, params.n_points, params.scale)
        k = int(rng.integers(len(X)))
        moved = space.random_step(X[k].point, params.epsilon, rng)
        return point_shift_record(space, X, k, moved, sample, params.tol, params.max_iters)

    return _finish("point-shift scan", *_run(params, one, "point-shift"))


def mass_shift_scan(params: ScanParams) -> LipschitzReport:
    """
    Changes one mass of a random configuration by +-epsilon times itself and records the normalized center
    displacement.
    """
    if params.n_points < 2:
        raise InputError("n_points", "a mass-shift scan needs at least 2 points")
    space = params.space

    def one(sample: int) -> Outcome:
        rng = make_rng(params.seed ^ sample)
        X = draw_configuration(space, rng, params.n_points, params.scale)
        k = int(rng.integers(len(X)))
        delta = params.epsilon * X[k].mass * (1.0 if rng.random() < 0.5 else -1.0)
        if X[k].mass + delta <= 0:
            delta = abs(delta)
        return mass_shift_record(space, X, k, delta, sample, params.tol, params.max_iters)

    return _finish("mass-shift scan", *_run(params, one, "mass-shift"))


def selector_scan(params: ScanParams) -> LipschitzReport:
    """
    Perturbs every generator of a random body by a step of length epsilon and records
    d(f(C), f(C')) / d_H(C, C'). Tree spaces also get the branch-straddle report.
    """
    space = params.space
    xi = params.ideal if params.ideal is not None else space.default_ideal()
    o = space.basepoint()
    space.validate_ideal(xi, o)
    opts = params.select_options()

    def one(sample: int) -> Outcome:
        rng = make_rng(params.seed ^ sample)
        C = ConvexBody(draw_configuration(space, rng, params.n_points, params.scale).points)
        C2 = ConvexBody(space.random_step(g, params.epsilon, rng) for g in C)
        return selector_record(space, C, C2, xi, o, opts, sample)

    straddle = None
    if isinstance(space, TreeSpace) and space.branch_vertices():
        try:
            straddle = straddle_scan(space, xi, params.smoothing, params.snap_tol, horizon=params.horizon,
                                     classify_tol=params.classify_tol)
        except InvalidPointError as err:
            logger.info("no straddle family: %s", err)
    return _finish("selector scan", *_run(params, one, "selector"), straddle)


def _straddle_site(space: TreeSpace, xi: IdealPoint, reach: float) -> tuple[str, int, int]:
    """
    A branch vertex with two finite edges of length > reach that do not lead toward the end xi.
    """
    assert xi.leaf is not None
    anchor = space.edges[space.ideal_edges[xi.leaf]][0]
    ideal_ids = set(space.ideal_edges.values())
    for w in space.branch_vertices():
        toward = space.next_edge_toward(w, anchor)
        branches = sorted(e for _, e in space.adjacency[w]
                          if e != toward and e not in ideal_ids and space.edges[e][2] > reach)
        if len(branches) >= 2:
            return w, branches[0], branches[1]
    raise InvalidPointError("tree has no branch vertex with two long enough branches away from the end")


def straddle_scan(space: TreeSpace, xi: IdealPoint, smoothing: bool, snap_tol: float = DEFAULT_SNAP_TOL,
                  halvings: int = STRADDLE_HALVINGS, horizon: float = DEFAULT_HORIZON,
                  classify_tol: float = DEFAULT_CLASSIFY_TOL) -> StraddleReport:
    """
    Bodies {g1(a), g2(a + eps)} and {g1(a + eps), g2(a)} with g1, g2 on two branches at a vertex B, at the given
    distances from B. They are eps apart in Hausdorff distance, but the raw selector picks the generator nearest
    the end, which jumps from one branch to the other: the ratio 2a / eps doubles with every halving of eps.
    With smoothing both selections are snapped onto B.
    """
    if not snap_tol > 0:
        raise InputError("snap_tol", f"must be positive, got {snap_tol!r}")
    space.validate_ideal(xi, space.basepoint())
    a = 2.0 ** math.floor(math.log2(snap_tol / 2.0))
    w, e1, e2 = _straddle_site(space, xi, snap_tol + 2.0 * a)
    opts = SelectOptions(horizon=horizon, classify_tol=classify_tol, snap_tol=snap_tol, smoothing=smoothing)
    o = space.basepoint()

    epsilons = tuple(a / 32.0 / 2.0 ** i for i in range(halvings + 1))
    ratios = []
    for eps in epsilons:
        C = ConvexBody([space.point_from_vertex(e1, w, a), space.point_from_vertex(e2, w, a + eps)])
        C2 = ConvexBody([space.point_from_vertex(e1, w, a + eps), space.point_from_vertex(e2, w, a)])
        record = selector_record(space, C, C2, xi, o, opts)
        assert isinstance(record, LipschitzRecord)
        ratios.append(record.ratio)
    report = StraddleReport(epsilons, tuple(ratios), smoothing)
    logger.info("straddle at %s (smoothing %s): ratios %s, diverging=%s bounded=%s",
                w, "on" if smoothing else "off", ["%.3g" % r for r in ratios], report.diverging, report.bounded)
    return report
