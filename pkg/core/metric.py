"""
Metric Core
===========
Geometric primitives for the box state-action space [0,1]^(state_dims + action_dims)
under the product inf-norm metric.

Regions are dyadic cells. A region at depth ``k`` has side length 2^-k and its
``radius`` field holds the cell diameter d_max * 2^-k (the root radius is d_max).
Cells are half-open [lo, hi) on every coordinate, closed at the outer boundary 1.0,
so the children of a split are disjoint and jointly exhaustive.

The covering-oracle contract used by the partition is:
    - distance(p, q)
    - split_region(region)
    - state_slice_nonempty(region, x)
Other metric spaces plug in by providing these three operations.
"""

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import List, Sequence, Tuple

from core.errors import ContractViolation, InvalidInputError

# Dyadic coordinates stay exact in binary floating point well past this depth.
MAX_DEPTH = 50

Vector = Tuple[float, ...]


def as_vector(values, dims: int, name: str = "vector") -> Vector:
    """Coerce a scalar or sequence into a float tuple of length ``dims``."""
    if isinstance(values, (int, float)):
        values = (values,)
    vec = tuple(float(v) for v in values)
    if len(vec) != dims:
        raise InvalidInputError(f"{name} has {len(vec)} coordinates, expected {dims}")
    return vec


@dataclass(frozen=True)
class SpaceDescriptor:
    """Dimensions of the box space S x A. The diameter under the inf-norm is 1."""
    state_dims: int = 1
    action_dims: int = 1

    def __post_init__(self):
        if self.state_dims < 1 or self.action_dims < 1:
            raise InvalidInputError(
                f"state_dims and action_dims must be >= 1, got "
                f"({self.state_dims}, {self.action_dims})"
            )

    @property
    def dims(self) -> int:
        return self.state_dims + self.action_dims

    @property
    def d_max(self) -> float:
        return 1.0

    def point(self, state, action) -> "Point":
        return Point(as_vector(state, self.state_dims, "state"),
                     as_vector(action, self.action_dims, "action"))

    def root_region(self) -> "BoxRegion":
        half = tuple(0.5 for _ in range(self.dims))
        center = Point(half[:self.state_dims], half[self.state_dims:])
        return BoxRegion(center=center, radius=self.d_max, depth=0)


@dataclass(frozen=True)
class Point:
    """A state-action pair (x, a)."""
    state: Vector
    action: Vector

    @property
    def coords(self) -> Vector:
        return self.state + self.action


@dataclass(frozen=True)
class BoxRegion:
    """Dyadic cell with its center, diameter bookkeeping radius and depth."""
    center: Point
    radius: float
    depth: int

    @cached_property
    def side(self) -> float:
        return 2.0 ** -self.depth

    @cached_property
    def lower(self) -> Vector:
        half = self.side / 2
        return tuple(c - half for c in self.center.coords)

    @cached_property
    def upper(self) -> Vector:
        half = self.side / 2
        return tuple(c + half for c in self.center.coords)

    @property
    def state_dims(self) -> int:
        return len(self.center.state)

    @property
    def dims(self) -> int:
        return len(self.center.coords)

    def volume(self) -> Fraction:
        """Exact Lebesgue volume of the cell, 2^-(depth * dims)."""
        return Fraction(1, 2 ** (self.depth * self.dims))

    def action_midpoint(self) -> Vector:
        return self.center.action


def _within(value: float, lo: float, hi: float) -> bool:
    return lo <= value < hi or (hi == 1.0 and value == 1.0)


def distance(p: Point, q: Point) -> float:
    """Product inf-norm: max over every state and action coordinate."""
    a, b = p.coords, q.coords
    if len(p.state) != len(q.state) or len(p.action) != len(q.action):
        raise InvalidInputError(
            f"dimension mismatch: ({len(p.state)}, {len(p.action)}) vs "
            f"({len(q.state)}, {len(q.action)})"
        )
    return max(abs(u - v) for u, v in zip(a, b))


def contains(region: BoxRegion, p: Point) -> bool:
    """Membership in the half-open dyadic cell of ``region``."""
    coords = p.coords
    if len(coords) != region.dims:
        raise InvalidInputError(f"point has {len(coords)} coordinates, region has {region.dims}")
    return all(_within(v, lo, hi) for v, lo, hi in zip(coords, region.lower, region.upper))


def state_slice_nonempty(region: BoxRegion, x: Sequence[float]) -> bool:
    """True iff some action a puts (x, a) inside the cell."""
    k = region.state_dims
    if len(x) != k:
        raise InvalidInputError(f"state has {len(x)} coordinates, expected {k}")
    lower, upper = region.lower, region.upper
    return all(_within(x[i], lower[i], upper[i]) for i in range(k))


def split_region(region: BoxRegion) -> List[BoxRegion]:
    """
    Split a cell into its 2^dims dyadic children.

    Children are ordered by their offset bits, state coordinates first, so in
    [0,1]^2 the root yields centers (0.25,0.25), (0.25,0.75), (0.75,0.25), (0.75,0.75).
    """
    if region.depth >= MAX_DEPTH:
        raise ContractViolation(
            f"cannot split below depth {MAX_DEPTH}: dyadic coordinates lose exactness"
        )
    k = region.state_dims
    quarter = region.side / 4
    lower = region.lower
    children = []
    for bits in itertools.product((0, 1), repeat=region.dims):
        coords = tuple(lo + quarter * (1 + 2 * b) for lo, b in zip(lower, bits))
        children.append(BoxRegion(
            center=Point(coords[:k], coords[k:]),
            radius=region.radius / 2,
            depth=region.depth + 1,
        ))
    return children
