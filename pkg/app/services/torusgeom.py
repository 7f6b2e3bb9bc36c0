"""
Torus actions on projective space.

Sign convention, fixed once for the whole engine:
  relation        prod_i (h + a_i)
  restriction     h |-> -a_i at p_i
  point class     prod_{j != i} (h + a_j)
  tangent at p_i  {a_j - a_i : j != i}
  hypersurface    d*h + chi_f   (coordinate x_i has weight a_i)
"""
import logging
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Tuple

from sympy.polys.rings import PolyRing

from app.errors import (
    NormalWeightAbsent,
    RepeatedWeights,
    UnknownPoint,
    VariableSetMismatch,
    ZeroNormalWeight,
)
from app.services.symalg import Character, MultiPoly, Scalar, substitute, to_ground, torus_ring

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FixedPoint:
    id: str
    tangent: Tuple[Character, ...]


@dataclass(frozen=True)
class FixedPointSpace:
    """A smooth T-variety with isolated fixed points, each carrying its tangent characters."""

    rank: int
    points: Tuple[FixedPoint, ...]

    def __post_init__(self) -> None:
        ids = [point.id for point in self.points]
        if len(set(ids)) != len(ids):
            raise ValueError(f"fixed point ids must be distinct: {ids}")
        sizes = {len(point.tangent) for point in self.points}
        if len(sizes) > 1:
            raise ValueError(f"tangent multisets have different sizes: {sorted(sizes)}")
        for point in self.points:
            for chi in point.tangent:
                if chi.rank != self.rank:
                    raise VariableSetMismatch(f"tangent character {chi} at {point.id} has wrong rank")
                if not chi.is_nonzero():
                    raise ValueError(f"zero tangent character at {point.id}")

    @property
    def dim(self) -> int:
        return len(self.points[0].tangent) if self.points else 0

    @property
    def ids(self) -> List[str]:
        return [point.id for point in self.points]

    @property
    def base_ring(self) -> PolyRing:
        return torus_ring(self.rank)

    def point(self, point_id: str) -> FixedPoint:
        for point in self.points:
            if point.id == point_id:
                return point
        raise UnknownPoint(f"no fixed point named {point_id!r}", point=point_id)

    def tangent(self, point_id: str) -> Tuple[Character, ...]:
        return self.point(point_id).tangent


@dataclass(frozen=True)
class ProjectiveSpaceAction:
    """T acting on P^n through the weights a_0..a_n of the coordinates."""

    rank: int
    weights: Tuple[Character, ...]
    labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self) -> None:
        for chi in self.weights:
            if chi.rank != self.rank:
                raise VariableSetMismatch(f"weight {chi.coeffs} does not have rank {self.rank}")
        if self.labels is not None and len(self.labels) != len(self.weights):
            raise ValueError("one label per weight is required")

    @classmethod
    def from_vectors(
        cls, vectors: Iterable[Sequence[int]], labels: Optional[Sequence[str]] = None
    ) -> "ProjectiveSpaceAction":
        weights = tuple(Character.of(*vector) for vector in vectors)
        rank = weights[0].rank if weights else 0
        return cls(rank, weights, tuple(labels) if labels is not None else None)

    @property
    def n(self) -> int:
        return len(self.weights) - 1

    @property
    def ids(self) -> List[str]:
        if self.labels is not None:
            return list(self.labels)
        return [f"p{i}" for i in range(len(self.weights))]

    @cached_property
    def ring(self) -> PolyRing:
        return torus_ring(self.rank, ("h",))

    @property
    def base_ring(self) -> PolyRing:
        return torus_ring(self.rank)

    @property
    def h(self) -> MultiPoly:
        return self.ring.gens[0]

    def index(self, point_id: str) -> int:
        try:
            return self.ids.index(point_id)
        except ValueError:
            raise UnknownPoint(f"no fixed point named {point_id!r}", point=point_id) from None

    def weight(self, point_id: str) -> Character:
        return self.weights[self.index(point_id)]

    def check_distinct(self) -> None:
        repeated = [chi for chi, count in Counter(self.weights).items() if count > 1]
        if repeated:
            raise RepeatedWeights(
                f"weights must be pairwise distinct, repeated: {[c.coeffs for c in repeated]}"
            )

    @cached_property
    def relation(self) -> MultiPoly:
        result = self.ring.one
        for chi in self.weights:
            result *= self.h + chi.linear_form(self.ring)
        return result

    def lift(self, p: MultiPoly) -> MultiPoly:
        """Move a polynomial in t1..t_r into the presented ring."""
        return substitute(p, list(self.ring.gens[1:]), self.ring)


@dataclass(frozen=True)
class EquivariantClass:
    """An element of Q[h, t] / prod(h + a_i), stored in reduced form (h-degree <= n)."""

    poly: MultiPoly
    action: ProjectiveSpaceAction

    def __post_init__(self) -> None:
        if self.poly.ring != self.action.ring:
            raise VariableSetMismatch("class polynomial is not in the presented ring")
        object.__setattr__(self, "poly", self.poly.rem(self.action.relation))

    @classmethod
    def one(cls, action: ProjectiveSpaceAction) -> "EquivariantClass":
        return cls(action.ring.one, action)

    def _same(self, other: "EquivariantClass") -> None:
        if other.action != self.action:
            raise VariableSetMismatch("classes belong to different torus actions")

    def __add__(self, other: "EquivariantClass") -> "EquivariantClass":
        self._same(other)
        return EquivariantClass(self.poly + other.poly, self.action)

    def __sub__(self, other: "EquivariantClass") -> "EquivariantClass":
        self._same(other)
        return EquivariantClass(self.poly - other.poly, self.action)

    def __mul__(self, other: "EquivariantClass") -> "EquivariantClass":
        self._same(other)
        return EquivariantClass(self.poly * other.poly, self.action)

    def scale(self, factor: Scalar) -> "EquivariantClass":
        return EquivariantClass(self.poly * to_ground(factor), self.action)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EquivariantClass):
            return NotImplemented
        return self.action == other.action and self.poly == other.poly

    def __hash__(self) -> int:
        return hash((tuple(sorted(self.poly.items())), self.action))

    @property
    def is_zero(self) -> bool:
        return not self.poly

    @property
    def degree(self) -> int:
        """Total degree in h and t; zero for the zero class."""
        return max((sum(monom) for monom in self.poly.keys()), default=0)

    @property
    def h_degree(self) -> int:
        return max((monom[0] for monom in self.poly.keys()), default=0)

    def coefficient(self, h_power: int) -> MultiPoly:
        """The coefficient of h^k, as a polynomial in t1..t_r."""
        base = self.action.base_ring
        result = base.zero
        for monom, coeff in self.poly.items():
            if monom[0] == h_power:
                result += base({monom[1:]: coeff})
        return result

    def __str__(self) -> str:
        return str(self.poly)


# ========== OPERATIONS ==========
def projective_fixed_points(action: ProjectiveSpaceAction) -> FixedPointSpace:
    action.check_distinct()
    points = []
    for i, (point_id, a_i) in enumerate(zip(action.ids, action.weights)):
        tangent = tuple(a_j - a_i for j, a_j in enumerate(action.weights) if j != i)
        points.append(FixedPoint(point_id, tangent))
    return FixedPointSpace(action.rank, tuple(points))


def reduce_class(c: EquivariantClass) -> EquivariantClass:
    """Normal form modulo the monic relation; classes are kept reduced, so this re-runs it."""
    return EquivariantClass(c.poly, c.action)


def restrict_class(c: EquivariantClass, point_id: str) -> MultiPoly:
    action = c.action
    a_i = action.weight(point_id)
    base = action.base_ring
    images = [-a_i.linear_form(base)] + list(base.gens)
    return substitute(c.poly, images, base)


def point_class(action: ProjectiveSpaceAction, point_id: str) -> EquivariantClass:
    action.check_distinct()
    i = action.index(point_id)
    result = action.ring.one
    for j, a_j in enumerate(action.weights):
        if j != i:
            result *= action.h + a_j.linear_form(action.ring)
    return EquivariantClass(result, action)


def hypersurface_class(
    action: ProjectiveSpaceAction, degrees: Sequence[Tuple[int, Character]]
) -> EquivariantClass:
    """prod (d_i*h + chi_i): the class of a complete intersection of invariant hypersurfaces."""
    result = action.ring.one
    for d, chi in degrees:
        result *= action.h * d + chi.linear_form(action.ring)
    return EquivariantClass(result, action)


def hypersurface_fixed_locus(
    action: ProjectiveSpaceAction, d: int, chi_f: Character, on_x: Sequence[str]
) -> FixedPointSpace:
    """Tangent data of a smooth invariant hypersurface at the listed fixed points."""
    ambient = projective_fixed_points(action)
    points = []
    for point_id in on_x:
        tangent = list(ambient.tangent(point_id))
        normal = action.weight(point_id).scaled(-d) + chi_f
        if not normal.is_nonzero():
            raise ZeroNormalWeight(f"normal weight at {point_id} is zero", point=point_id)
        if normal not in tangent:
            raise NormalWeightAbsent(
                f"normal weight {normal} is not a tangent weight at {point_id}; "
                "the hypersurface is singular there or the weights are not generic",
                point=point_id,
            )
        tangent.remove(normal)
        logger.debug("normal weight at %s: %s", point_id, normal)
        points.append(FixedPoint(point_id, tuple(tangent)))
    return FixedPointSpace(action.rank, tuple(points))
