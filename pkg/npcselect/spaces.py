from __future__ import annotations

import logging
import math
from collections import deque
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InputError, InvalidPointError
from .state import SpacePoint, IdealPoint

logger = logging.getLogger(__name__)

HYPERBOLOID_TOL = 1e-9
ROUNDING_SLACK = 64
NULL_TOL = 1e-9
DIRECTION_TOL = 1e-12
# Below this length the sinh weights of a hyperbolic geodesic degenerate to linear ones.
SMALL_ARC = 1e-8

SEED_MASK = (1 << 64) - 1


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed & SEED_MASK)


def unit_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    while True:
        g = rng.normal(size=dim)
        norm = float(np.linalg.norm(g))
        if norm > 1e-12:
            return g / norm


def check_param(t: float) -> None:
    if not (0.0 <= t <= 1.0):
        raise InvalidPointError(f"geodesic parameter {t!r} outside [0, 1]")


class Space:
    """
    This class is the base class for each model Hadamard space.
    A space provides the metric, unique geodesics, unit rays toward ideal points and Busemann functions;
    everything else in the package is written against this interface only.

    Instances are immutable after construction and safe to share between threads.
    """
    kind = ""

    def basepoint(self) -> SpacePoint:
        """
        Returns the configured basepoint o against which ideal points are normalized.
        """
        raise TypeError("Called basepoint on Space base type")

    def default_ideal(self) -> IdealPoint:
        """
        Returns a canonical ideal point for this space, normalized against the basepoint.
        """
        raise TypeError("Called default_ideal on Space base type")

    def validate(self, x: SpacePoint) -> None:
        """
        Raises InvalidPointError if x is not a point of this space.
        """
        raise TypeError("Called validate on Space base type")

    def validate_ideal(self, xi: IdealPoint, o: SpacePoint) -> None:
        """
        Raises InvalidPointError if xi is not an ideal point of this space normalized against o.
        """
        raise TypeError("Called validate_ideal on Space base type")

    def distance(self, x: SpacePoint, y: SpacePoint, check: bool = True) -> float:
        if check:
            self.validate(x)
            self.validate(y)
        return self._distance(x, y)

    def geodesic_point(self, x: SpacePoint, y: SpacePoint, t: float, check: bool = True) -> SpacePoint:
        """
        Returns the point at arclength fraction t from x on the unique geodesic from x to y.
        """
        check_param(t)
        if check:
            self.validate(x)
            self.validate(y)
        if t == 0.0:
            return x
        if t == 1.0:
            return y
        return self._interpolate(x, y, t)

    def busemann(self, xi: IdealPoint, o: SpacePoint, x: SpacePoint) -> float:
        """
        Busemann function b(x) = lim (d(x, g(s)) - s) along the unit ray g from o toward xi.
        Decreases toward xi; horoballs are the sublevel sets {b <= t}.
        """
        self.validate_ideal(xi, o)
        self.validate(x)
        return self._busemann(xi, o, x)

    def ray_point(self, x: SpacePoint, xi: IdealPoint, s: float) -> SpacePoint:
        """
        Returns the point at distance s from x on the unit ray from x toward xi.
        """
        if not s >= 0:
            raise InvalidPointError(f"ray length must be nonnegative, got {s!r}")
        self.validate(x)
        if s == 0:
            return x
        return self._ray_point(x, xi, s)

    def ray_separation(self, x: SpacePoint, y: SpacePoint, xi: IdealPoint, s: float) -> float:
        """
        Distance between the points reached after time s on the unit rays from x and y toward xi.
        """
        return self._distance(self.ray_point(x, xi, s), self.ray_point(y, xi, s))

    def random_point(self, seed: int, scale: float) -> SpacePoint:
        """
        Deterministic random point within distance `scale` of the basepoint.
        """
        raise TypeError("Called random_point on Space base type")

    def random_step(self, x: SpacePoint, size: float, rng: np.random.Generator) -> SpacePoint:
        """
        Geodesic step of length `size` from x in a random direction.
        """
        raise TypeError("Called random_step on Space base type")

    def distance_matrix(self, xs: Sequence[SpacePoint], ys: Sequence[SpacePoint]) -> np.ndarray:
        out = np.zeros((len(xs), len(ys)))
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                out[i, j] = self._distance(x, y)
        return out

    def branch_vertices_near(self, x: SpacePoint, radius: float) -> list[tuple[float, SpacePoint]]:
        """
        Singular points (branch vertices) within `radius` of x, nearest first. Smooth spaces have none.
        """
        return []

    def _distance(self, x: SpacePoint, y: SpacePoint) -> float:
        raise TypeError("Called _distance on Space base type")

    def _interpolate(self, x: SpacePoint, y: SpacePoint, t: float) -> SpacePoint:
        raise TypeError("Called _interpolate on Space base type")

    def _busemann(self, xi: IdealPoint, o: SpacePoint, x: SpacePoint) -> float:
        raise TypeError("Called _busemann on Space base type")

    def _ray_point(self, x: SpacePoint, xi: IdealPoint, s: float) -> SpacePoint:
        raise TypeError("Called _ray_point on Space base type")


class EuclideanSpace(Space):
    kind = "euclidean"

    def __init__(self, dim: int):
        if not (isinstance(dim, int) and dim >= 1):
            raise InputError("dim", f"must be a positive integer, got {dim!r}")
        self.dim = dim
        self._origin = SpacePoint.at([0.0] * dim)

    def __repr__(self) -> str:
        return f"EuclideanSpace(dim={self.dim})"

    def basepoint(self) -> SpacePoint:
        return self._origin

    def default_ideal(self) -> IdealPoint:
        return IdealPoint.direction([1.0] + [0.0] * (self.dim - 1))

    def validate(self, x: SpacePoint) -> None:
        if x.coords is None or len(x.coords) != self.dim:
            raise InvalidPointError(f"expected {self.dim} coordinates, got {x!r}")
        if not all(math.isfinite(c) for c in x.coords):
            raise InvalidPointError(f"non-finite coordinates in {x!r}")

    def validate_ideal(self, xi: IdealPoint, o: SpacePoint) -> None:
        if xi.kind != IdealPoint.DIRECTION or xi.coords is None or len(xi.coords) != self.dim:
            raise InvalidPointError(f"expected a {self.dim}-dimensional direction, got {xi!r}")
        if abs(float(np.linalg.norm(xi.array())) - 1.0) > DIRECTION_TOL:
            raise InvalidPointError(f"direction {xi!r} is not a unit vector")
        self.validate(o)

    def _distance(self, x: SpacePoint, y: SpacePoint) -> float:
        return float(np.linalg.norm(x.array() - y.array()))

    def _interpolate(self, x: SpacePoint, y: SpacePoint, t: float) -> SpacePoint:
        a = x.array()
        return SpacePoint.from_array(a + t * (y.array() - a))

    def _busemann(self, xi: IdealPoint, o: SpacePoint, x: SpacePoint) -> float:
        return -float(np.dot(x.array() - o.array(), xi.array()))

    def _ray_point(self, x: SpacePoint, xi: IdealPoint, s: float) -> SpacePoint:
        return SpacePoint.from_array(x.array() + s * xi.array())

    def random_point(self, seed: int, scale: float) -> SpacePoint:
        rng = make_rng(seed)
        r = scale * rng.random()
        return SpacePoint.from_array(self._origin.array() + r * unit_vector(rng, self.dim))

    def random_step(self, x: SpacePoint, size: float, rng: np.random.Generator) -> SpacePoint:
        return SpacePoint.from_array(x.array() + size * unit_vector(rng, self.dim))

    def distance_matrix(self, xs: Sequence[SpacePoint], ys: Sequence[SpacePoint]) -> np.ndarray:
        return cdist(np.array([x.coords for x in xs]), np.array([y.coords for y in ys]))


def minkowski(a: np.ndarray, b: np.ndarray) -> float:
    return float(-a[0] * b[0] + np.dot(a[1:], b[1:]))


def to_hyperboloid(v: np.ndarray) -> np.ndarray:
    """
    Re-projects an ambient vector onto the upper sheet by recomputing the time coordinate from the spatial part.
    """
    spatial = v[1:]
    out = np.empty_like(v)
    out[0] = math.sqrt(1.0 + float(np.dot(spatial, spatial)))
    out[1:] = spatial
    return out


class HyperbolicSpace(Space):
    """
    Hyperbolic space of curvature -1 in the hyperboloid model: points x in R^(dim+1) with <x,x> = -1, x_0 > 0,
    under the Minkowski product <a,b> = -a_0 b_0 + sum a_i b_i.
    """
    kind = "hyperbolic"

    def __init__(self, dim: int):
        if not (isinstance(dim, int) and dim >= 1):
            raise InputError("dim", f"must be a positive integer, got {dim!r}")
        self.dim = dim
        self._apex = SpacePoint.at([1.0] + [0.0] * dim)

    def __repr__(self) -> str:
        return f"HyperbolicSpace(dim={self.dim})"

    def basepoint(self) -> SpacePoint:
        return self._apex

    def default_ideal(self) -> IdealPoint:
        return IdealPoint.null_vector([1.0, 1.0] + [0.0] * (self.dim - 1))

    def validate(self, x: SpacePoint) -> None:
        if x.coords is None or len(x.coords) != self.dim + 1:
            raise InvalidPointError(f"expected {self.dim + 1} hyperboloid coordinates, got {x!r}")
        if not all(math.isfinite(c) for c in x.coords):
            raise InvalidPointError(f"non-finite coordinates in {x!r}")
        a = x.array()
        # rounding in <x, x> grows like eps * x_0^2
        tol = max(HYPERBOLOID_TOL, ROUNDING_SLACK * np.finfo(float).eps * a[0] * a[0])
        if a[0] <= 0 or abs(minkowski(a, a) + 1.0) > tol:
            raise InvalidPointError(f"{x!r} is off the hyperboloid")

    def validate_ideal(self, xi: IdealPoint, o: SpacePoint) -> None:
        if xi.kind != IdealPoint.NULL_VECTOR or xi.coords is None or len(xi.coords) != self.dim + 1:
            raise InvalidPointError(f"expected a null vector of length {self.dim + 1}, got {xi!r}")
        self.validate(o)
        v = xi.array()
        if v[0] <= 0 or abs(minkowski(v, v)) > NULL_TOL:
            raise InvalidPointError(f"{xi!r} is not a future-pointing null vector")
        if abs(minkowski(o.array(), v) + 1.0) > NULL_TOL:
            raise InvalidPointError(f"{xi!r} is not normalized against the basepoint {o!r}")

    def normalized_ideal(self, v: Iterable[float], o: Optional[SpacePoint] = None) -> IdealPoint:
        """
        Scales a future-pointing null vector so that its product with o is -1.
        """
        base = (o or self._apex).array()
        arr = np.array(list(v), dtype=float)
        if arr.shape != (self.dim + 1,):
            raise InvalidPointError(f"expected a null vector of length {self.dim + 1}, got {list(arr)!r}")
        c = -minkowski(base, arr)
        if c <= 0:
            raise InvalidPointError(f"{list(arr)!r} is not future-pointing")
        return IdealPoint.null_vector(arr / c)

    def _distance(self, x: SpacePoint, y: SpacePoint) -> float:
        # chord form 2 asinh(|x-y|/2) keeps precision for nearby points where arcosh(-<x,y>) does not
        diff = x.array() - y.array()
        q = max(minkowski(diff, diff), 0.0)
        return 2.0 * math.asinh(math.sqrt(q) / 2.0)

    def _interpolate(self, x: SpacePoint, y: SpacePoint, t: float) -> SpacePoint:
        d = self._distance(x, y)
        if d == 0.0:
            return x
        if d < SMALL_ARC:
            a, b = 1.0 - t, t
        else:
            sd = math.sinh(d)
            a, b = math.sinh((1.0 - t) * d) / sd, math.sinh(t * d) / sd
        return SpacePoint.from_array(to_hyperboloid(a * x.array() + b * y.array()))

    @staticmethod
    def _horo_product(a: np.ndarray, v: np.ndarray) -> float:
        """
        -<a, v> for a point a and a future null vector v, without the cancellation of a_0 v_0 - a_s . v_s.
        """
        n = v[1:] / v[0]
        along = float(np.dot(a[1:], n))
        perp = a[1:] - along * n
        return float(v[0] * (1.0 + np.dot(perp, perp)) / (a[0] + along))

    def _busemann(self, xi: IdealPoint, o: SpacePoint, x: SpacePoint) -> float:
        return math.log(self._horo_product(x.array(), xi.array()))

    def _ray_point(self, x: SpacePoint, xi: IdealPoint, s: float) -> SpacePoint:
        a = x.array()
        v = xi.array()
        c = self._horo_product(a, v)
        return SpacePoint.from_array(to_hyperboloid(math.exp(-s) * a + (math.sinh(s) / c) * v))

    def ray_separation(self, x: SpacePoint, y: SpacePoint, xi: IdealPoint, s: float) -> float:
        # closed form in terms of d(x, y) and the Busemann gap; the ray points themselves grow like e^s
        d0 = self._distance(x, y)
        v = xi.array()
        gap = math.log(self._horo_product(x.array(), v)) - math.log(self._horo_product(y.array(), v))
        decay = math.exp(-2.0 * s)
        q = decay * math.sinh(d0 / 2.0) ** 2 + (1.0 - decay) * math.sinh(gap / 2.0) ** 2
        return 2.0 * math.asinh(math.sqrt(q))

    def _boost_tangent(self, x: np.ndarray, g: np.ndarray) -> np.ndarray:
        """
        Carries the tangent vector (0, g) at the apex to x by the Lorentz boost taking the apex to x.
        """
        spatial = x[1:]
        dot = float(np.dot(spatial, g))
        out = np.empty_like(x)
        out[0] = dot
        out[1:] = g + spatial * (dot / (1.0 + x[0]))
        return out

    def random_point(self, seed: int, scale: float) -> SpacePoint:
        rng = make_rng(seed)
        r = scale * rng.random()
        g = unit_vector(rng, self.dim)
        return SpacePoint.from_array(to_hyperboloid(np.concatenate(([math.cosh(r)], math.sinh(r) * g))))

    def random_step(self, x: SpacePoint, size: float, rng: np.random.Generator) -> SpacePoint:
        a = x.array()
        w = self._boost_tangent(a, unit_vector(rng, self.dim))
        return SpacePoint.from_array(to_hyperboloid(math.cosh(size) * a + math.sinh(size) * w))


class TreeSpace(Space):
    """
    A finite metric tree. Points are (edge-id, offset) pairs with the offset measured from the edge's first vertex.

    Leaves marked as ideal become ends of the space: their edge is stored oriented from the anchor vertex toward the
    leaf and extends without bound, so offsets beyond its length are valid there.
    A point sitting on a vertex is canonically represented on the lowest incident edge-id.
    """
    kind = "tree"

    def __init__(self, edges: Sequence[tuple[str, str, float]], ideal_leaves: Iterable[str] = (),
                 basepoint: Optional[tuple[str, float]] = None):
        if not edges:
            raise InputError("edges", "a tree needs at least one edge")
        self.adjacency: dict[str, list[tuple[str, int]]] = {}
        raw: list[tuple[str, str, float]] = []
        for u, v, length in edges:
            length = float(length)
            if not (math.isfinite(length) and length > 0):
                raise InputError("edges", f"edge {u}-{v} must have positive finite length, got {length!r}")
            if u == v:
                raise InputError("edges", f"self-loop at {u}")
            raw.append((u, v, length))
            self.adjacency.setdefault(u, []).append((v, len(raw) - 1))
            self.adjacency.setdefault(v, []).append((u, len(raw) - 1))
        if len(raw) != len(self.adjacency) - 1:
            raise InputError("edges", "edge list does not form a tree (need |E| = |V| - 1)")

        self.ideal_edges: dict[str, int] = {}
        for leaf in ideal_leaves:
            if leaf not in self.adjacency:
                raise InputError("ideal_leaves", f"unknown vertex {leaf}")
            if len(self.adjacency[leaf]) != 1:
                raise InputError("ideal_leaves", f"{leaf} is not a leaf")
            _, e = self.adjacency[leaf][0]
            u, v, length = raw[e]
            if u == leaf:
                raw[e] = (v, u, length)
            self.ideal_edges[leaf] = e
        self.edges: tuple[tuple[str, str, float], ...] = tuple(raw)
        self._ideal_edge_ids = frozenset(self.ideal_edges.values())

        self._vdist: dict[str, dict[str, float]] = {}
        self._parent: dict[str, dict[str, tuple[str, int]]] = {}
        for root in self.adjacency:
            self._explore(root)
        if any(len(d) != len(self.adjacency) for d in self._vdist.values()):
            raise InputError("edges", "edge list does not form a connected tree")

        self._vertex_points = {w: self._canonical_vertex(w) for w in self.adjacency}
        if basepoint is None:
            self._basepoint = self._vertex_points[self.edges[0][0]]
        else:
            name, offset = basepoint
            self._basepoint = self.point_named(name, offset)
            self.validate(self._basepoint)

    def __repr__(self) -> str:
        return f"TreeSpace(edges={list(self.edges)!r}, ideal_leaves={sorted(self.ideal_edges)!r})"

    def _explore(self, root: str) -> None:
        dist = {root: 0.0}
        parent: dict[str, tuple[str, int]] = {}
        frontier = deque([root])
        while frontier:
            w = frontier.popleft()
            for nb, e in self.adjacency[w]:
                if nb in dist:
                    continue
                dist[nb] = dist[w] + self.edges[e][2]
                parent[nb] = (w, e)
                frontier.append(nb)
        self._vdist[root] = dist
        self._parent[root] = parent

    def _canonical_vertex(self, w: str) -> SpacePoint:
        e = min(e for _, e in self.adjacency[w])
        u, _, length = self.edges[e]
        return SpacePoint.on_edge(e, 0.0 if u == w else length)

    # --- naming and construction ---

    def edge_name(self, e: int) -> str:
        u, v, _ = self.edges[e]
        return f"{u}-{v}"

    def degree(self, w: str) -> int:
        return len(self.adjacency[w])

    def branch_vertices(self) -> list[str]:
        return sorted(w for w in self.adjacency if self.degree(w) >= 3)

    def next_edge_toward(self, w: str, target: str) -> Optional[int]:
        """
        First edge on the path from vertex w to vertex target, None when they coincide.
        """
        if w == target:
            return None
        return self._vertex_path(w, target)[0][2]

    def vertex_point(self, w: str) -> SpacePoint:
        if w not in self._vertex_points:
            raise InvalidPointError(f"unknown vertex {w}")
        return self._vertex_points[w]

    def point(self, e: int, offset: float) -> SpacePoint:
        """
        Builds the canonical point at `offset` on edge e.
        Offsets are clamped to the edge, which only absorbs rounding from path arithmetic.
        """
        u, v, length = self.edges[e]
        offset = max(offset, 0.0)
        if e not in self._ideal_edge_ids:
            offset = min(offset, length)
        if offset == 0.0:
            return self._vertex_points[u]
        if offset == length:
            return self._vertex_points[v]
        return SpacePoint.on_edge(e, offset)

    def point_named(self, name: str, offset: float) -> SpacePoint:
        """
        Resolves an edge name "U-V" in either orientation; the offset is measured from the first named vertex.
        """
        offset = float(offset)
        for e, (u, v, length) in enumerate(self.edges):
            if name in {f"{u}-{v}", f"{v}-{u}"}:
                beyond = offset > length and e not in self._ideal_edge_ids
                if not math.isfinite(offset) or offset < 0.0 or beyond:
                    raise InvalidPointError(f"offset {offset!r} out of range on edge {name}")
            if name == f"{u}-{v}":
                return self.point(e, float(offset))
            if name == f"{v}-{u}":
                if e in self._ideal_edge_ids:
                    raise InvalidPointError(f"ideal leaf edge {name} must be named from its anchor ({u}-{v})")
                return self.point(e, length - float(offset))
        raise InvalidPointError(f"unknown edge {name}")

    # --- Space interface ---

    def basepoint(self) -> SpacePoint:
        return self._basepoint

    def default_ideal(self) -> IdealPoint:
        if not self.ideal_edges:
            raise InvalidPointError("tree has no marked ideal leaves")
        return IdealPoint.end(sorted(self.ideal_edges)[0])

    def validate(self, x: SpacePoint) -> None:
        if x.edge is None or not (0 <= x.edge < len(self.edges)):
            raise InvalidPointError(f"expected a tree point on one of {len(self.edges)} edges, got {x!r}")
        length = self.edges[x.edge][2]
        if not (math.isfinite(x.offset) and x.offset >= 0.0):
            raise InvalidPointError(f"offset out of range in {x!r}")
        if x.offset > length and x.edge not in self._ideal_edge_ids:
            raise InvalidPointError(f"offset beyond edge length {length} in {x!r}")
        # a vertex has exactly one representation, so equal points compare equal
        if x.offset == 0.0 or (x.offset == length and x.edge not in self._ideal_edge_ids):
            canonical = self.point(x.edge, x.offset)
            if x != canonical:
                raise InvalidPointError(f"non-canonical vertex {x!r}, use {canonical!r}")

    def validate_ideal(self, xi: IdealPoint, o: SpacePoint) -> None:
        if xi.kind != IdealPoint.END or xi.leaf not in self.ideal_edges:
            raise InvalidPointError(f"expected one of the ideal leaves {sorted(self.ideal_edges)}, got {xi!r}")
        self.validate(o)

    def _legs(self, x: SpacePoint) -> list[tuple[str, float]]:
        assert x.edge is not None
        u, v, length = self.edges[x.edge]
        if x.edge in self._ideal_edge_ids:
            return [(u, x.offset)]
        return [(u, x.offset), (v, length - x.offset)]

    def _route(self, x: SpacePoint, y: SpacePoint) -> tuple[float, str, float, str, float]:
        """
        Total length, exit vertex of x's edge with its leg, entry vertex of y's edge with its leg.
        """
        return min((la + self._vdist[a][b] + lb, a, la, b, lb)
                   for a, la in self._legs(x) for b, lb in self._legs(y))

    def _distance(self, x: SpacePoint, y: SpacePoint) -> float:
        if x.edge == y.edge:
            return abs(x.offset - y.offset)
        return self._route(x, y)[0]

    def distance_to_vertex(self, x: SpacePoint, w: str) -> float:
        return min(leg + self._vdist[a][w] for a, leg in self._legs(x))

    def _vertex_path(self, a: str, b: str) -> list[tuple[str, str, int]]:
        hops = []
        parent = self._parent[a]
        w = b
        while w != a:
            prev, e = parent[w]
            hops.append((prev, w, e))
            w = prev
        hops.reverse()
        return hops

    def point_from_vertex(self, e: int, w: str, s: float) -> SpacePoint:
        u, _, length = self.edges[e]
        return self.point(e, s if u == w else length - s)

    def _along(self, x: SpacePoint, y: SpacePoint, s: float) -> SpacePoint:
        """
        Point at distance s from x on the path to y.
        """
        assert x.edge is not None and y.edge is not None
        if x.edge == y.edge:
            return self.point(x.edge, x.offset + s if y.offset >= x.offset else x.offset - s)
        _, a, la, b, lb = self._route(x, y)
        if s <= la:
            u, _, _ = self.edges[x.edge]
            return self.point(x.edge, x.offset - s if a == u else x.offset + s)
        s -= la
        for p, _, e in self._vertex_path(a, b):
            length = self.edges[e][2]
            if s <= length:
                return self.point_from_vertex(e, p, s)
            s -= length
        return self.point_from_vertex(y.edge, b, min(s, lb))

    def _interpolate(self, x: SpacePoint, y: SpacePoint, t: float) -> SpacePoint:
        return self._along(x, y, t * self._distance(x, y))

    def _height(self, leaf: str, x: SpacePoint) -> float:
        # signed distance to the anchor, negative once x is out on the ideal edge
        e = self.ideal_edges[leaf]
        if x.edge == e:
            return -x.offset
        return self.distance_to_vertex(x, self.edges[e][0])

    def _busemann(self, xi: IdealPoint, o: SpacePoint, x: SpacePoint) -> float:
        assert xi.leaf is not None
        return self._height(xi.leaf, x) - self._height(xi.leaf, o)

    def _ray_point(self, x: SpacePoint, xi: IdealPoint, s: float) -> SpacePoint:
        assert xi.leaf is not None
        if xi.leaf not in self.ideal_edges:
            raise InvalidPointError(f"{xi!r} is not an end of this tree")
        e = self.ideal_edges[xi.leaf]
        if x.edge == e:
            return self.point(e, x.offset + s)
        anchor = self.edges[e][0]
        d = self.distance_to_vertex(x, anchor)
        if s <= d:
            return self._along(x, self._vertex_points[anchor], s)
        return self.point(e, s - d)

    def random_point(self, seed: int, scale: float) -> SpacePoint:
        rng = make_rng(seed)
        e = int(rng.integers(len(self.edges)))
        p = self.point(e, rng.random() * self.edges[e][2])
        r = scale * rng.random()
        d = self._distance(self._basepoint, p)
        if d > r:
            p = self._along(self._basepoint, p, r)
        return p

    def random_step(self, x: SpacePoint, size: float, rng: np.random.Generator) -> SpacePoint:
        assert x.edge is not None
        e, offset = x.edge, x.offset
        u, v, length = self.edges[e]
        if offset == 0.0 or (offset == length and e not in self._ideal_edge_ids):
            at = u if offset == 0.0 else v
            choices = self.adjacency[at]
            _, e = choices[int(rng.integers(len(choices)))]
            offset, direction = self._leave_vertex(e, at)
        else:
            direction = 1 if rng.random() < 0.5 else -1
        remaining = size
        while True:
            u, v, length = self.edges[e]
            room = math.inf if direction > 0 and e in self._ideal_edge_ids else (
                length - offset if direction > 0 else offset)
            if remaining <= room:
                return self.point(e, offset + direction * remaining)
            remaining -= room
            at = v if direction > 0 else u
            onward = [(nb, f) for nb, f in self.adjacency[at] if f != e]
            if not onward:
                logger.debug("random step stopped at finite leaf %s with %g left", at, remaining)
                return self._vertex_points[at]
            _, e = onward[int(rng.integers(len(onward)))]
            offset, direction = self._leave_vertex(e, at)

    def _leave_vertex(self, e: int, w: str) -> tuple[float, int]:
        u, _, length = self.edges[e]
        return (0.0, 1) if u == w else (length, -1)

    def branch_vertices_near(self, x: SpacePoint, radius: float) -> list[tuple[float, SpacePoint]]:
        near = [(d, self._vertex_points[w]) for w in self.branch_vertices()
                if (d := self.distance_to_vertex(x, w)) <= radius]
        near.sort(key=lambda item: item[0])
        return near
