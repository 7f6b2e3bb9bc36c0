"""
Equivariant vector bundles presented by their fiber characters at fixed points,
and Chern polynomials evaluated there.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Dict, Mapping, Optional, Sequence, Tuple

from app.errors import DegreeMismatch, IndexOutOfRange, UndefinedBundle, UnknownPoint, UnmappedPoint
from app.services.symalg import Character, MultiPoly, Scalar, elem_sym, to_ground, torus_ring
from app.services.torusgeom import FixedPointSpace, ProjectiveSpaceAction

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EquivariantBundle:
    rank: int
    torus_rank: int
    fibers: Dict[str, Tuple[Character, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        fibers = {point_id: tuple(chars) for point_id, chars in self.fibers.items()}
        for point_id, chars in fibers.items():
            if len(chars) != self.rank:
                raise ValueError(
                    f"fiber at {point_id} has {len(chars)} characters, expected {self.rank}"
                )
            if any(chi.rank != self.torus_rank for chi in chars):
                raise ValueError(f"fiber at {point_id} mixes torus ranks")
        object.__setattr__(self, "fibers", fibers)

    @property
    def points(self) -> Tuple[str, ...]:
        return tuple(self.fibers)

    def weights(self, point_id: str) -> Tuple[Character, ...]:
        try:
            return self.fibers[point_id]
        except KeyError:
            raise UnknownPoint(f"bundle is not defined at {point_id!r}", point=point_id) from None

    def restrict_to(self, point_ids: Sequence[str]) -> "EquivariantBundle":
        return EquivariantBundle(
            self.rank, self.torus_rank, {p: self.weights(p) for p in point_ids}
        )


# ========== CONSTRUCTORS ==========
def tangent_bundle(space: FixedPointSpace) -> EquivariantBundle:
    return EquivariantBundle(
        space.dim, space.rank, {point.id: point.tangent for point in space.points}
    )


def line_bundle(action: ProjectiveSpaceAction, d: int, chi: Character) -> EquivariantBundle:
    """O(d) twisted by chi: weight -d*a_i + chi at p_i."""
    fibers = {
        point_id: (a_i.scaled(-d) + chi,) for point_id, a_i in zip(action.ids, action.weights)
    }
    return EquivariantBundle(1, action.rank, fibers)


def pullback_bundle(
    point_map: Mapping[str, str],
    bundle: EquivariantBundle,
    points: Optional[Sequence[str]] = None,
) -> EquivariantBundle:
    """f^*E for an equivariant map given on fixed points (X-point id -> Y-point id)."""
    for point_id in points or ():
        if point_id not in point_map:
            raise UnmappedPoint(f"{point_id!r} has no image under the point map", point=point_id)
    fibers = {}
    for source, target in point_map.items():
        if target not in bundle.fibers:
            raise UnmappedPoint(
                f"{source!r} maps to {target!r}, where the bundle is undefined", point=source
            )
        fibers[source] = bundle.fibers[target]
    logger.debug("pulled back a rank %d bundle to %d points", bundle.rank, len(fibers))
    return EquivariantBundle(bundle.rank, bundle.torus_rank, fibers)


def direct_sum(first: EquivariantBundle, second: EquivariantBundle) -> EquivariantBundle:
    if set(first.fibers) != set(second.fibers):
        raise UnmappedPoint("direct sums need bundles over the same points")
    return EquivariantBundle(
        first.rank + second.rank,
        first.torus_rank,
        {p: first.fibers[p] + second.fibers[p] for p in first.fibers},
    )


# ========== CHERN CLASSES ==========
def chern_at_point(bundle: EquivariantBundle, point_id: str, i: int) -> MultiPoly:
    """c_i^T(E)|_p: the i-th elementary symmetric polynomial in the fiber characters."""
    if not 0 <= i <= bundle.rank:
        raise IndexOutOfRange(f"Chern index {i} outside 0..{bundle.rank}")
    return elem_sym(bundle.weights(point_id), i, torus_ring(bundle.torus_rank))


@dataclass(frozen=True)
class ChernFactor:
    bundle: str
    index: int
    power: int = 1


@dataclass(frozen=True)
class ChernMonomial:
    coefficient: Fraction
    factors: Tuple[ChernFactor, ...] = ()

    @property
    def weighted_degree(self) -> int:
        return sum(factor.index * factor.power for factor in self.factors)


@dataclass(frozen=True)
class ChernPolynomial:
    """A polynomial in symbols x^i_j (Chern class i of bundle j) of one weighted degree."""

    monomials: Tuple[ChernMonomial, ...]
    degree: int

    def __post_init__(self) -> None:
        for monomial in self.monomials:
            if monomial.weighted_degree != self.degree:
                raise DegreeMismatch(
                    f"monomial of weighted degree {monomial.weighted_degree} "
                    f"in a polynomial of degree {self.degree}"
                )

    @classmethod
    def of(cls, *monomials: ChernMonomial) -> "ChernPolynomial":
        degrees = {monomial.weighted_degree for monomial in monomials}
        if len(degrees) > 1:
            raise DegreeMismatch(f"monomials have different weighted degrees: {sorted(degrees)}")
        return cls(tuple(monomials), degrees.pop() if degrees else 0)

    @classmethod
    def monomial(cls, *factors: Tuple[str, int, int], coefficient: Scalar = 1) -> "ChernPolynomial":
        return cls.of(
            ChernMonomial(Fraction(coefficient), tuple(ChernFactor(*f) for f in factors))
        )

    @property
    def bundles(self) -> Tuple[str, ...]:
        return tuple(sorted({f.bundle for m in self.monomials for f in m.factors}))

    def __add__(self, other: "ChernPolynomial") -> "ChernPolynomial":
        return ChernPolynomial.of(*(self.monomials + other.monomials))


def eval_chern_polynomial(
    poly: ChernPolynomial,
    bundles: Mapping[str, EquivariantBundle],
    point_id: str,
    torus_rank: int,
) -> MultiPoly:
    ring = torus_ring(torus_rank)
    cache: Dict[Tuple[str, int], MultiPoly] = {}
    result = ring.zero
    for monomial in poly.monomials:
        term = ring(to_ground(monomial.coefficient))
        for factor in monomial.factors:
            if factor.bundle not in bundles:
                raise UndefinedBundle(f"unknown bundle {factor.bundle!r}", bundle=factor.bundle)
            key = (factor.bundle, factor.index)
            if key not in cache:
                cache[key] = chern_at_point(bundles[factor.bundle], point_id, factor.index)
            term *= cache[key] ** factor.power
        result += term
    return result


def twisted_chern(rho: int, base_dim: int, lam: Character, i: int) -> MultiPoly:
    """
    c_i^T(E_lambda) for a rank-rho bundle on which T acts through lambda:
    sum_{j<=i} C(rho-j, i-j) c_j lambda^(i-j), with c_j = 0 above base_dim.
    Lives in Q[c_1..c_base_dim, t_1..t_r].
    """
    if i < 0:
        raise IndexOutOfRange(f"Chern index {i} is negative")
    ring = torus_ring(lam.rank, tuple(f"c{j}" for j in range(1, base_dim + 1)))
    form = lam.linear_form(ring)
    chern = [ring.one] + list(ring.gens[:base_dim])
    result = ring.zero
    for j in range(0, min(i, base_dim, rho) + 1):
        result += chern[j] * form ** (i - j) * comb(rho - j, i - j)
    return result
