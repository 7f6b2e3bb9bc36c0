"""
Localization and residue engine.

Everything here is computed over the ambient smooth variety; a singular
subvariety enters only through its pushed-forward class, the fixed points
it contains and the bundles restricted to those points.
"""
import logging
import random
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Callable, Dict, ItemsView, List, Mapping, Optional, Sequence, Tuple, TypeVar

from sympy.polys.domains import QQ
from sympy.polys.rings import PolyRing

from app.config import DEFAULT_SETTINGS, EngineSettings
from app.errors import (
    DegreeMismatch,
    InconsistentExpansion,
    NonFactorablePivot,
    NonTriangularBasis,
    SubstitutionMismatch,
    UndefinedBundle,
    VanishingCheckFailed,
)
from app.services.bundles import ChernPolynomial, EquivariantBundle, eval_chern_polynomial
from app.services.symalg import (
    Character,
    FactoredClass,
    LocalizedClass,
    MultiPoly,
    constant_value,
    evaluate_generic,
    is_homogeneous,
    product_of,
    to_fraction,
    to_ground,
)
from app.services.torusgeom import (
    EquivariantClass,
    FixedPointSpace,
    ProjectiveSpaceAction,
    point_class,
    projective_fixed_points,
    restrict_class,
)

logger = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass(frozen=True)
class LocalizationTable:
    """Fixed point id -> coefficient of the pushed-forward point class."""

    entries: Dict[str, LocalizedClass]

    def __getitem__(self, point_id: str) -> LocalizedClass:
        return self.entries[point_id]

    @property
    def ids(self) -> List[str]:
        return list(self.entries)

    def items(self) -> ItemsView[str, LocalizedClass]:
        return self.entries.items()

    def support(self) -> List[str]:
        return [point_id for point_id, beta in self.entries.items() if not beta.is_zero]

    def with_entry(self, point_id: str, beta: LocalizedClass) -> "LocalizationTable":
        entries = dict(self.entries)
        entries[point_id] = beta
        return LocalizationTable(entries)

    def as_strings(self) -> Dict[str, str]:
        return {point_id: str(beta) for point_id, beta in self.entries.items()}


@dataclass(frozen=True)
class Validation:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ResidueReport:
    value: Fraction
    contributions: Dict[str, LocalizedClass]
    total: LocalizedClass
    validations: Tuple[Validation, ...] = ()


@dataclass(frozen=True)
class VerificationResult:
    passed: bool
    residual: Optional[EquivariantClass] = None

    def __bool__(self) -> bool:
        return self.passed


@dataclass
class _Remainder:
    """numerator / (scalar * product(factors)) during back-substitution."""

    numerator: MultiPoly
    scalar: Fraction = Fraction(1)
    factors: Counter = field(default_factory=Counter)


def factor_pivot(p: MultiPoly) -> FactoredClass:
    """Write a polynomial in t1..t_r as a rational times a product of characters."""
    if not p:
        raise NonFactorablePivot("pivot is zero")
    ring = p.ring
    rank = ring.ngens
    chars: List[Character] = []
    _, factors = p.factor_list()
    for factor, exponent in factors:
        if any(sum(monom) != 1 for monom in factor.keys()):
            raise NonFactorablePivot(f"pivot factor {factor} is not a linear form", pivot=p)
        vector = [
            to_fraction(factor.get(tuple(int(j == k) for j in range(rank)), QQ.zero))
            for k in range(rank)
        ]
        clear = lcm(*(v.denominator for v in vector))
        chars.extend([Character(tuple(int(v * clear) for v in vector))] * exponent)
    product = product_of(chars, ring)
    scalar = to_fraction(p.LC) / to_fraction(product.LC)
    if p != product * to_ground(scalar):
        raise NonFactorablePivot(f"{p} does not split into characters", pivot=p)
    return FactoredClass.from_characters(chars, scalar)


class LocalizationService:
    """Euler classes, integration, residues and localization tables for isolated fixed points."""

    def __init__(self, settings: Optional[EngineSettings] = None) -> None:
        self.settings = settings or DEFAULT_SETTINGS

    def _rng(self) -> random.Random:
        return random.Random(self.settings.seed)

    def _constant(self, f: LocalizedClass) -> Fraction:
        return constant_value(
            f, self._rng(), self.settings.max_resamples, self.settings.sample_bound
        )

    def _per_point(self, fn: Callable[[str], T], ids: Sequence[str]) -> List[T]:
        if self.settings.max_workers > 1 and len(ids) > 1:
            with ThreadPoolExecutor(max_workers=self.settings.max_workers) as pool:
                return list(pool.map(fn, ids))
        return [fn(point_id) for point_id in ids]

    # ========== INTEGRATION ==========
    @staticmethod
    def euler_class(space: FixedPointSpace, point_id: str) -> FactoredClass:
        return FactoredClass.from_characters(space.tangent(point_id))

    def integrate(self, space: FixedPointSpace, values: Mapping[str, MultiPoly]) -> LocalizedClass:
        """Sum over fixed points of value / Euler class."""
        total = LocalizedClass.zero(space.base_ring)
        for point_id in space.ids:
            euler = self.euler_class(space, point_id).invert(space.base_ring)
            total = total + LocalizedClass.from_poly(values[point_id]) * euler
        return total

    def equivariant_degree(self, action: ProjectiveSpaceAction, alpha: EquivariantClass) -> Fraction:
        """Degree of a top-codimension class read off its equivariant lift."""
        if not is_homogeneous(alpha.poly, action.n):
            raise DegreeMismatch(f"class {alpha} is not homogeneous of degree {action.n}")
        space = projective_fixed_points(action)
        values = {point_id: restrict_class(alpha, point_id) for point_id in space.ids}
        return self._constant(self.integrate(space, values))

    # ========== RESIDUES ==========
    def _contributions(
        self,
        space: FixedPointSpace,
        bundles: Mapping[str, EquivariantBundle],
        poly: ChernPolynomial,
        ids: Sequence[str],
        weight: Callable[[str], MultiPoly],
    ) -> Dict[str, LocalizedClass]:
        ring = space.base_ring

        def contribution(point_id: str) -> LocalizedClass:
            value = eval_chern_polynomial(poly, bundles, point_id, space.rank) * weight(point_id)
            beta = LocalizedClass.from_poly(value) * self.euler_class(space, point_id).invert(ring)
            logger.debug("contribution at %s: %s", point_id, beta)
            return beta

        return dict(zip(ids, self._per_point(contribution, ids)))

    @staticmethod
    def _check_bundles(poly: ChernPolynomial, bundles: Mapping[str, EquivariantBundle]) -> None:
        for name in poly.bundles:
            if name not in bundles:
                raise UndefinedBundle(f"polynomial uses undefined bundle {name!r}", bundle=name)

    def _finish(
        self, contributions: Dict[str, LocalizedClass], ring: PolyRing, validations: List[Validation]
    ) -> ResidueReport:
        total = LocalizedClass.zero(ring)
        for beta in contributions.values():
            total = total + beta
        value = self._constant(total)
        validations.append(Validation("constancy", True, "exact polynomial identity"))
        report = ResidueReport(value, contributions, total, tuple(validations))
        if self.settings.check_substitutions:
            report = ResidueReport(
                value,
                contributions,
                total,
                report.validations + tuple(self.substitution_check(report, self.settings.check_substitutions)),
            )
        logger.info("residue sum over %d points: %s", len(contributions), value)
        return report

    def bott_residue_report(
        self,
        space: FixedPointSpace,
        bundles: Mapping[str, EquivariantBundle],
        poly: ChernPolynomial,
    ) -> ResidueReport:
        if poly.degree != space.dim:
            raise DegreeMismatch(
                f"polynomial has weighted degree {poly.degree}, space has dimension {space.dim}"
            )
        self._check_bundles(poly, bundles)
        ring = space.base_ring
        contributions = self._contributions(space, bundles, poly, space.ids, lambda _: ring.one)
        validations = [Validation("degree", True, f"weighted degree {poly.degree} = dim {space.dim}")]
        return self._finish(contributions, ring, validations)

    def bott_residue(
        self,
        space: FixedPointSpace,
        bundles: Mapping[str, EquivariantBundle],
        poly: ChernPolynomial,
    ) -> Fraction:
        return self.bott_residue_report(space, bundles, poly).value

    def integrate_polynomial(
        self,
        space: FixedPointSpace,
        bundles: Mapping[str, EquivariantBundle],
        poly: ChernPolynomial,
    ) -> LocalizedClass:
        """The residue sum without the degree requirement (zero below the dimension)."""
        self._check_bundles(poly, bundles)
        values = {p: eval_chern_polynomial(poly, bundles, p, space.rank) for p in space.ids}
        return self.integrate(space, values)

    def singular_report(
        self,
        action: ProjectiveSpaceAction,
        gamma: EquivariantClass,
        on_x: Sequence[str],
        bundles: Mapping[str, EquivariantBundle],
        poly: ChernPolynomial,
        dim_x: int,
    ) -> ResidueReport:
        ambient = projective_fixed_points(action)
        codim = action.n - dim_x
        if not is_homogeneous(gamma.poly, codim):
            raise DegreeMismatch(f"class {gamma} is not homogeneous of degree {codim}")
        if poly.degree != dim_x:
            raise DegreeMismatch(
                f"polynomial has weighted degree {poly.degree}, subvariety has dimension {dim_x}"
            )
        self._check_bundles(poly, bundles)
        for point_id in on_x:
            action.index(point_id)

        validations = [
            Validation("degree", True, f"class degree {codim}, weighted degree {dim_x}")
        ]
        for point_id in ambient.ids:
            if point_id in on_x:
                continue
            restricted = restrict_class(gamma, point_id)
            if restricted:
                raise VanishingCheckFailed(
                    f"class restricts to {restricted} at {point_id}, which is off the subvariety",
                    point=point_id,
                )
            validations.append(
                Validation(f"vanishing({point_id})", True, "validated (necessary condition)")
            )

        contributions = self._contributions(
            ambient, bundles, poly, list(on_x), lambda p: restrict_class(gamma, p)
        )
        return self._finish(contributions, ambient.base_ring, validations)

    def singular_chern_number(
        self,
        action: ProjectiveSpaceAction,
        gamma: EquivariantClass,
        on_x: Sequence[str],
        bundles: Mapping[str, EquivariantBundle],
        poly: ChernPolynomial,
        dim_x: int,
    ) -> Fraction:
        return self.singular_report(action, gamma, on_x, bundles, poly, dim_x).value

    def substitution_check(self, report: ResidueReport, k: int) -> List[Validation]:
        """Re-evaluate the per-point sum at k generic integer points."""
        rng = self._rng()
        classes = list(report.contributions.values())
        validations = []
        for attempt in range(k):
            point, values = evaluate_generic(
                classes, rng, self.settings.max_resamples, self.settings.sample_bound
            )
            sampled = sum(values, Fraction(0))
            if sampled != report.value:
                raise SubstitutionMismatch(
                    f"sum is {sampled} at {point}, expected {report.value}", point=point
                )
            validations.append(Validation(f"substitution({attempt + 1})", True, str(point)))
        return validations

    # ========== LOCALIZATION TABLES ==========
    def localize_class(self, action: ProjectiveSpaceAction, alpha: EquivariantClass) -> LocalizationTable:
        space = projective_fixed_points(action)
        ring = space.base_ring

        def entry(point_id: str) -> LocalizedClass:
            restricted = LocalizedClass.from_poly(restrict_class(alpha, point_id))
            return restricted * self.euler_class(space, point_id).invert(ring)

        return LocalizationTable(dict(zip(space.ids, self._per_point(entry, space.ids))))

    def verify_localization(
        self, action: ProjectiveSpaceAction, alpha: EquivariantClass, table: LocalizationTable
    ) -> VerificationResult:
        """Check sum beta_p * [p] == alpha after clearing denominators."""
        base = action.base_ring
        common: Counter = Counter()
        for beta in table.entries.values():
            common |= Counter(beta.denominator)
        lhs = action.ring.zero
        for point_id, beta in table.items():
            missing = common - Counter(beta.denominator)
            scaled = beta.numerator * product_of(missing.elements(), base)
            lhs += action.lift(scaled) * point_class(action, point_id).poly
        rhs = action.lift(product_of(common.elements(), base)) * alpha.poly
        residual = EquivariantClass(lhs - rhs, action)
        if residual.is_zero:
            return VerificationResult(True)
        logger.debug("localization residual: %s", residual)
        return VerificationResult(False, residual)

    def expand_in_basis(
        self, basis: Sequence[EquivariantClass], target: EquivariantClass
    ) -> List[LocalizedClass]:
        """Back-substitution against a basis with one element per h-degree."""
        degrees = [element.h_degree for element in basis]
        if len(set(degrees)) != len(degrees):
            raise NonTriangularBasis(f"basis elements share h-degrees: {degrees}")
        action = target.action
        base = action.base_ring
        remainder = _Remainder(target.poly)
        coefficients: List[Optional[LocalizedClass]] = [None] * len(basis)
        for k in sorted(range(len(basis)), key=lambda j: -degrees[j]):
            element = basis[k]
            lead = element.coefficient(degrees[k])
            pivot = factor_pivot(lead)
            q = EquivariantClass(remainder.numerator, action).coefficient(degrees[k])
            factors = tuple(remainder.factors.elements()) + pivot.factors
            coefficients[k] = LocalizedClass(q, factors).scale(1 / (remainder.scalar * pivot.scalar))
            remainder = _Remainder(
                remainder.numerator * action.lift(lead) - action.lift(q) * element.poly,
                remainder.scalar * pivot.scalar,
                remainder.factors + Counter(pivot.factors),
            )
            logger.debug("basis element %d: coefficient %s", k, coefficients[k])
        leftover = EquivariantClass(remainder.numerator, action)
        if not leftover.is_zero:
            raise InconsistentExpansion(f"target is not in the span of the basis, left {leftover}")
        return [c if c is not None else LocalizedClass.zero(base) for c in coefficients]
