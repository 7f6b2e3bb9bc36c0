"""
Type-A flag varieties: Weyl group combinatorics, fixed-point tangent data,
double Schubert classes and their localization.

Characters live in the rank-n lattice with coordinates t1..tn. Double
classes live in Q[x1..xn, y1..yn]; restriction to p_u sends x_i to t_i
and y_i to a coordinate permuted by u, in the direction fixed by
calibration.
"""
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import permutations
from typing import Dict, List, Optional, Sequence, Tuple

from sympy.polys.rings import PolyRing

from app.errors import CalibrationFailed, Indivisible
from app.services.bundles import EquivariantBundle
from app.services.localize import LocalizationTable
from app.services.symalg import (
    Character,
    FactoredClass,
    LocalizedClass,
    MultiPoly,
    substitute,
    torus_ring,
)
from app.services.torusgeom import FixedPoint, FixedPointSpace

logger = logging.getLogger(__name__)

STANDARD = "standard"
REVERSED = "reversed"


# ========== WEYL GROUP ==========
@dataclass(frozen=True, order=True)
class Permutation:
    """A permutation of 1..n in one-line notation."""

    word: Tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.word) != list(range(1, len(self.word) + 1)):
            raise ValueError(f"{self.word} is not a permutation of 1..{len(self.word)}")

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def longest(cls, n: int) -> "Permutation":
        return cls(tuple(range(n, 0, -1)))

    @classmethod
    def simple(cls, n: int, i: int) -> "Permutation":
        word = list(range(1, n + 1))
        word[i - 1], word[i] = word[i], word[i - 1]
        return cls(tuple(word))

    @classmethod
    def from_id(cls, point_id: str) -> "Permutation":
        return cls(tuple(int(ch) for ch in point_id))

    @property
    def n(self) -> int:
        return len(self.word)

    @property
    def id(self) -> str:
        return "".join(str(k) for k in self.word)

    @cached_property
    def length(self) -> int:
        return sum(
            1
            for i in range(self.n)
            for j in range(i + 1, self.n)
            if self.word[i] > self.word[j]
        )

    @property
    def sign(self) -> int:
        return -1 if self.length % 2 else 1

    def __call__(self, k: int) -> int:
        return self.word[k - 1]

    def __mul__(self, other: "Permutation") -> "Permutation":
        """Composition: (self * other)(k) = self(other(k))."""
        return Permutation(tuple(self(other(k)) for k in range(1, other.n + 1)))

    def inverse(self) -> "Permutation":
        word = [0] * self.n
        for k, image in enumerate(self.word, start=1):
            word[image - 1] = k
        return Permutation(tuple(word))

    def has_ascent(self, i: int) -> bool:
        return self.word[i - 1] < self.word[i]

    def act(self, chi: Character) -> Character:
        """The Weyl action on characters: e_k -> e_{u(k)}."""
        coeffs = [0] * chi.rank
        for k, c in enumerate(chi.coeffs, start=1):
            coeffs[self(k) - 1] = c
        return Character(tuple(coeffs))

    def __str__(self) -> str:
        return self.id


def all_permutations(n: int) -> List[Permutation]:
    return [Permutation(word) for word in permutations(range(1, n + 1))]


def bruhat_leq(u: Permutation, w: Permutation) -> bool:
    """Tableau criterion: sorted prefixes of u are dominated by those of w."""
    for k in range(1, u.n):
        if any(a > b for a, b in zip(sorted(u.word[:k]), sorted(w.word[:k]))):
            return False
    return True


@dataclass(frozen=True)
class WeylGroup:
    n: int

    @cached_property
    def elements(self) -> List[Permutation]:
        return all_permutations(self.n)

    @property
    def identity(self) -> Permutation:
        return Permutation.identity(self.n)

    @property
    def longest(self) -> Permutation:
        return Permutation.longest(self.n)

    @staticmethod
    def length(w: Permutation) -> int:
        return w.length

    @staticmethod
    def sign(w: Permutation) -> int:
        return w.sign

    @staticmethod
    def leq(u: Permutation, w: Permutation) -> bool:
        return bruhat_leq(u, w)


def weyl_ops(n: int) -> WeylGroup:
    if n < 1:
        raise ValueError("the symmetric group needs n >= 1")
    return WeylGroup(n)


@dataclass(frozen=True)
class TypeARootData:
    n: int

    @cached_property
    def positive_roots(self) -> Tuple[Character, ...]:
        return tuple(
            Character.basis(self.n, i) - Character.basis(self.n, j)
            for i in range(1, self.n + 1)
            for j in range(i + 1, self.n + 1)
        )

    @property
    def negative_roots(self) -> Tuple[Character, ...]:
        return tuple(-alpha for alpha in self.positive_roots)

    @property
    def count(self) -> int:
        return len(self.positive_roots)


def is_negative_root(chi: Character) -> bool:
    first = next(c for c in chi.coeffs if c)
    return first < 0


# ========== FIXED POINTS ==========
@lru_cache(maxsize=None)
def flag_fixed_points(n: int) -> FixedPointSpace:
    """Points p_w of SL_n/B with tangent characters w(negative roots)."""
    if n < 2:
        raise ValueError("flag varieties need n >= 2")
    roots = TypeARootData(n)
    points = tuple(
        FixedPoint(w.id, tuple(w.act(beta) for beta in roots.negative_roots))
        for w in all_permutations(n)
    )
    return FixedPointSpace(n, points)


def c_w_class(n: int, w: Permutation) -> FactoredClass:
    """(-1)^N (-1)^w prod_{alpha > 0} alpha, N the number of positive roots."""
    roots = TypeARootData(n)
    sign = (-1) ** roots.count * w.sign
    return FactoredClass.from_characters(roots.positive_roots, sign)


def flag_line_bundle(space: FixedPointSpace, lam: Character) -> EquivariantBundle:
    """G x^B k_lambda: fiber u*lambda at p_u."""
    fibers = {point.id: (Permutation.from_id(point.id).act(lam),) for point in space.points}
    return EquivariantBundle(1, space.rank, fibers)


# ========== DOUBLE CLASSES ==========
def double_ring(n: int) -> PolyRing:
    names = tuple(f"x{i}" for i in range(1, n + 1)) + tuple(f"y{i}" for i in range(1, n + 1))
    return torus_ring(0, names)


@dataclass(frozen=True)
class DoubleClass:
    n: int
    poly: MultiPoly
    degree: int

    def __mul__(self, other: "DoubleClass") -> "DoubleClass":
        return DoubleClass(self.n, self.poly * other.poly, self.degree + other.degree)

    def __str__(self) -> str:
        return str(self.poly)


def top_class(n: int, orientation: str = STANDARD) -> MultiPoly:
    ring = double_ring(n)
    x, y = ring.gens[:n], ring.gens[n:]
    result = ring.one
    if orientation == STANDARD:
        for i in range(1, n + 1):
            for j in range(1, n + 1 - i):
                result *= x[i - 1] - y[j - 1]
    elif orientation == REVERSED:
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                result *= x[j - 1] - y[i - 1]
    else:
        raise ValueError(f"unknown orientation {orientation!r}")
    return result


def divided_difference(p: MultiPoly, i: int) -> MultiPoly:
    """(p - s_i p) / (x_i - x_{i+1}) in the x-variables."""
    ring = p.ring
    swapped = ring.zero
    for monom, coeff in p.items():
        exponents = list(monom)
        exponents[i - 1], exponents[i] = exponents[i], exponents[i - 1]
        swapped += ring({tuple(exponents): coeff})
    quotient, remainder = (p - swapped).div(ring.gens[i - 1] - ring.gens[i])
    if remainder:
        raise Indivisible(f"divided difference d_{i} left a remainder", index=i)
    return quotient


@lru_cache(maxsize=None)
def _descendant(n: int, word: Tuple[int, ...], orientation: str) -> MultiPoly:
    sigma = Permutation(word)
    if sigma == Permutation.longest(n):
        return top_class(n, orientation)
    i = next(k for k in range(1, n) if sigma.has_ascent(k))
    longer = sigma * Permutation.simple(n, i)
    return divided_difference(_descendant(n, longer.word, orientation), i)


def descendant_class(n: int, sigma: Permutation, orientation: str = STANDARD) -> DoubleClass:
    """The divided-difference descendant of the top class indexed by sigma; degree l(sigma)."""
    return DoubleClass(n, _descendant(n, sigma.word, orientation), sigma.length)


# ========== CONVENTIONS ==========
INDEX_MAPS = ("w0*v", "v*w0", "v^-1*w0", "w0*v^-1")
DIRECTIONS = ("u", "u^-1")


@dataclass(frozen=True)
class Convention:
    """How F_v is indexed, which way y-variables move under u, and whether F_v carries (-1)^v."""

    orientation: str
    index: str
    direction: str
    signed: bool

    def index_of(self, v: Permutation) -> Permutation:
        w0 = Permutation.longest(v.n)
        return {
            "w0*v": w0 * v,
            "v*w0": v * w0,
            "v^-1*w0": v.inverse() * w0,
            "w0*v^-1": w0 * v.inverse(),
        }[self.index]

    def double_class(self, v: Permutation) -> DoubleClass:
        descendant = descendant_class(v.n, self.index_of(v), self.orientation)
        if self.signed and v.sign < 0:
            return DoubleClass(v.n, -descendant.poly, descendant.degree)
        return descendant

    def restrict(self, F: DoubleClass, u: Permutation) -> MultiPoly:
        target = torus_ring(F.n)
        t = target.gens
        mover = u if self.direction == "u" else u.inverse()
        images = list(t) + [t[mover(i) - 1] for i in range(1, F.n + 1)]
        return substitute(F.poly, images, target)

    def __str__(self) -> str:
        sign = "(-1)^v" if self.signed else "+1"
        return f"{self.orientation} top, index {self.index}, y -> t_{{{self.direction}(i)}}, sign {sign}"


CANDIDATES: Tuple[Convention, ...] = tuple(
    Convention(orientation, index, direction, signed)
    for orientation in (STANDARD, REVERSED)
    for index in INDEX_MAPS
    for direction in DIRECTIONS
    for signed in (False, True)
)


@dataclass(frozen=True)
class CandidateResult:
    convention: Convention
    passed: bool
    failure: str = ""


@dataclass(frozen=True)
class CalibrationReport:
    ranks: Tuple[int, ...]
    results: Tuple[CandidateResult, ...]
    chosen: Convention


def _table(n: int, v: Permutation, convention: Convention) -> Dict[str, LocalizedClass]:
    space = flag_fixed_points(n)
    ring = space.base_ring
    F = convention.double_class(v)
    table = {}
    for u in all_permutations(n):
        euler = FactoredClass.from_characters(space.tangent(u.id)).invert(ring)
        table[u.id] = LocalizedClass.from_poly(convention.restrict(F, u)) * euler
    return table


def _normal_product(n: int, v: Permutation) -> MultiPoly:
    ring = torus_ring(n)
    result = ring.one
    for chi in flag_fixed_points(n).tangent(v.id):
        if is_negative_root(chi):
            result *= chi.linear_form(ring)
    return result


def _first_failure(convention: Convention, n: int) -> Optional[str]:
    space = flag_fixed_points(n)
    ring = space.base_ring
    group = weyl_ops(n)
    top = _table(n, group.longest, convention)
    for point_id, beta in top.items():
        if beta != FactoredClass.from_characters(space.tangent(point_id)).invert(ring):
            return f"fundamental class on S_{n} at {point_id}"
    bottom = _table(n, group.identity, convention)
    expected_bottom = {u.id: LocalizedClass.zero(ring) for u in group.elements}
    expected_bottom[group.identity.id] = LocalizedClass.from_poly(ring.one)
    if bottom != expected_bottom:
        return f"point class on S_{n}"
    for v in group.elements:
        F = convention.double_class(v)
        for u in group.elements:
            if not bruhat_leq(u, v) and convention.restrict(F, u):
                return f"support of X_{v} on S_{n} at {u}"
    for v in group.elements:
        if convention.restrict(convention.double_class(v), v) != _normal_product(n, v):
            return f"normal weights of X_{v} on S_{n}"
    return None


def calibrate(ranks: Sequence[int] = (2, 3)) -> CalibrationReport:
    """Run every candidate convention against the boundary validations on each rank."""
    ranks = tuple(sorted(set(ranks)))
    results = []
    for convention in CANDIDATES:
        failure = None
        for n in ranks:
            failure = _first_failure(convention, n)
            if failure:
                break
        results.append(CandidateResult(convention, failure is None, failure or ""))
    passing = [result.convention for result in results if result.passed]
    if len(passing) != 1:
        raise CalibrationFailed(
            f"{len(passing)} conventions pass the boundary validations, expected exactly one",
            ranks=ranks,
        )
    logger.info("calibrated Schubert convention: %s", passing[0])
    return CalibrationReport(ranks, tuple(results), passing[0])


@lru_cache(maxsize=None)
def calibrated_convention(ranks: Tuple[int, ...] = (2, 3)) -> Convention:
    return calibrate(ranks).chosen


# ========== LOCALIZATION ==========
def double_schubert(n: int, v: Permutation, convention: Optional[Convention] = None) -> DoubleClass:
    """F_v, of degree codim X_v."""
    return (convention or calibrated_convention()).double_class(v)


def restrict_double(F: DoubleClass, u: Permutation, convention: Optional[Convention] = None) -> MultiPoly:
    return (convention or calibrated_convention()).restrict(F, u)


def flag_restriction_table(
    n: int, F: DoubleClass, convention: Optional[Convention] = None
) -> Dict[str, MultiPoly]:
    return {u.id: restrict_double(F, u, convention) for u in all_permutations(n)}


def schubert_localize(
    n: int, v: Permutation, convention: Optional[Convention] = None
) -> LocalizationTable:
    """u -> F_v(u) / c_u for u <= v, zero elsewhere."""
    convention = convention or calibrated_convention()
    table = _table(n, v, convention)
    ring = torus_ring(n)
    for u in all_permutations(n):
        if not bruhat_leq(u, v):
            table[u.id] = LocalizedClass.zero(ring)
    return LocalizationTable(table)


def equivariant_multiplicity(
    n: int, w: Permutation, u: Permutation, convention: Optional[Convention] = None
) -> LocalizedClass:
    return schubert_localize(n, w, convention)[u.id]
