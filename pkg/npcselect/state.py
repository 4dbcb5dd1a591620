from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence, Any

import numpy as np

from .errors import InputError


class SpacePoint:
    """
    An immutable point of one of the model spaces.
    Euclidean and hyperbolic points carry a coordinate tuple, tree points an (edge-id, offset) pair.
    Which representation is valid is decided by the owning Space, see Space.validate.
    """

    def __init__(self, coords: Optional[tuple[float, ...]] = None, edge: Optional[int] = None, offset: float = 0.0):
        assert (coords is None) != (edge is None), "A point has either coordinates or an edge"
        self.coords = coords
        self.edge = edge
        self.offset = float(offset)

    @staticmethod
    def at(coords: Iterable[float]) -> SpacePoint:
        return SpacePoint(coords=tuple(float(c) for c in coords))

    @staticmethod
    def from_array(arr: np.ndarray) -> SpacePoint:
        return SpacePoint(coords=tuple(arr.tolist()))

    @staticmethod
    def on_edge(edge: int, offset: float) -> SpacePoint:
        return SpacePoint(edge=edge, offset=offset)

    @property
    def is_tree(self) -> bool:
        return self.edge is not None

    def array(self) -> np.ndarray:
        assert self.coords is not None, "Tree points have no coordinate array"
        return np.array(self.coords, dtype=float)

    def sort_key(self) -> tuple[float, ...]:
        if self.coords is not None:
            return self.coords
        assert self.edge is not None
        return (float(self.edge), self.offset)

    def __eq__(self, other: Any) -> bool:
        return (isinstance(other, SpacePoint) and self.coords == other.coords
                and self.edge == other.edge and self.offset == other.offset)

    def __hash__(self) -> int:
        return hash((self.coords, self.edge, self.offset))

    def __repr__(self) -> str:
        if self.coords is not None:
            return f"SpacePoint.at({list(self.coords)!r})"
        return f"SpacePoint.on_edge({self.edge!r}, {self.offset!r})"


class IdealPoint:
    """
    A point at infinity: a unit direction (euclidean), a future-pointing null vector (hyperbolic)
    or a marked ideal leaf (tree).
    """
    DIRECTION = "direction"
    NULL_VECTOR = "null_vector"
    END = "end_leaf"

    def __init__(self, kind: str, coords: Optional[tuple[float, ...]] = None, leaf: Optional[str] = None):
        assert kind in {IdealPoint.DIRECTION, IdealPoint.NULL_VECTOR, IdealPoint.END}, kind
        self.kind = kind
        self.coords = coords
        self.leaf = leaf

    @staticmethod
    def direction(u: Iterable[float]) -> IdealPoint:
        return IdealPoint(IdealPoint.DIRECTION, coords=tuple(float(c) for c in u))

    @staticmethod
    def null_vector(v: Iterable[float]) -> IdealPoint:
        return IdealPoint(IdealPoint.NULL_VECTOR, coords=tuple(float(c) for c in v))

    @staticmethod
    def end(leaf: str) -> IdealPoint:
        return IdealPoint(IdealPoint.END, leaf=leaf)

    def array(self) -> np.ndarray:
        assert self.coords is not None, "Tree ends have no coordinate array"
        return np.array(self.coords, dtype=float)

    def __eq__(self, other: Any) -> bool:
        return (isinstance(other, IdealPoint) and self.kind == other.kind
                and self.coords == other.coords and self.leaf == other.leaf)

    def __hash__(self) -> int:
        return hash((self.kind, self.coords, self.leaf))

    def __repr__(self) -> str:
        if self.kind == IdealPoint.END:
            return f"IdealPoint.end({self.leaf!r})"
        return f"IdealPoint.{self.kind}({list(self.coords or ())!r})"


@dataclass(frozen=True)
class WeightedPoint:
    point: SpacePoint
    mass: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mass) and self.mass > 0):
            raise InputError("mass", f"must be positive and finite, got {self.mass!r}")

    def with_mass(self, mass: float) -> WeightedPoint:
        return WeightedPoint(self.point, mass)


class Configuration:
    """
    An ordered, nonempty set of weighted points (x_i, m_i) living in one space.
    Immutable; derived configurations are built with `without`, `replace` or the constructors.
    """

    def __init__(self, items: Iterable[WeightedPoint]):
        self.items: tuple[WeightedPoint, ...] = tuple(items)
        if not self.items:
            raise InputError("points", "a configuration needs at least one point")

    @staticmethod
    def uniform(points: Iterable[SpacePoint]) -> Configuration:
        return Configuration(WeightedPoint(p, 1.0) for p in points)

    @staticmethod
    def of(points: Sequence[SpacePoint], masses: Sequence[float]) -> Configuration:
        assert len(points) == len(masses)
        return Configuration(WeightedPoint(p, float(m)) for p, m in zip(points, masses))

    @property
    def total_mass(self) -> float:
        return math.fsum(item.mass for item in self.items)

    @property
    def points(self) -> list[SpacePoint]:
        return [item.point for item in self.items]

    @property
    def masses(self) -> list[float]:
        return [item.mass for item in self.items]

    def without(self, index: int) -> Configuration:
        return Configuration(self.items[:index] + self.items[index + 1:])

    def replace(self, index: int, item: WeightedPoint) -> Configuration:
        return Configuration(self.items[:index] + (item,) + self.items[index + 1:])

    def scaled(self, factor: float) -> Configuration:
        return Configuration(item.with_mass(item.mass * factor) for item in self.items)

    def permuted(self, order: Sequence[int]) -> Configuration:
        assert sorted(order) == list(range(len(self.items)))
        return Configuration(self.items[i] for i in order)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[WeightedPoint]:
        return iter(self.items)

    def __getitem__(self, index: int) -> WeightedPoint:
        return self.items[index]

    def __repr__(self) -> str:
        return f"Configuration({list(self.items)!r})"


class ConvexBody:
    """
    A convex set given by a finite generator set; the hull itself is never materialized.
    Exact duplicate generators are dropped, keeping first occurrences in order.
    """

    def __init__(self, generators: Iterable[SpacePoint]):
        seen: set[SpacePoint] = set()
        gens = []
        for g in generators:
            if g not in seen:
                seen.add(g)
                gens.append(g)
        if not gens:
            raise InputError("generators", "a body needs at least one generator")
        self.generators: tuple[SpacePoint, ...] = tuple(gens)

    @property
    def is_singleton(self) -> bool:
        return len(self.generators) == 1

    def __len__(self) -> int:
        return len(self.generators)

    def __iter__(self) -> Iterator[SpacePoint]:
        return iter(self.generators)

    def __repr__(self) -> str:
        return f"ConvexBody({list(self.generators)!r})"


@dataclass(frozen=True)
class BarycenterResult:
    center: SpacePoint
    iterations: int
    diameter_trace: tuple[float, ...] = field(default_factory=tuple)
    converged: bool = True
