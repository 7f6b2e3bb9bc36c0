"""
Exact arithmetic for the localization engine.

Polynomials are sympy sparse ring elements over QQ. Localized classes are
fractions whose denominators are multisets of primitive linear characters,
so normalization only ever needs trial division by linear forms.
"""
import logging
import random
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Any, Iterable, List, Optional, Sequence, Tuple, Union

from sympy.polys.domains import QQ
from sympy.polys.orderings import lex
from sympy.polys.rings import PolyElement, PolyRing

from app.errors import (
    DegreeMismatch,
    DenominatorVanishes,
    IndexOutOfRange,
    Indivisible,
    NotConstant,
    VariableSetMismatch,
)

logger = logging.getLogger(__name__)

Rational = Fraction
MultiPoly = PolyElement
Scalar = Union[int, Fraction]


# ========== RINGS AND COEFFICIENTS ==========
@lru_cache(maxsize=None)
def torus_ring(rank: int, extra: Tuple[str, ...] = ()) -> PolyRing:
    """Polynomial ring over QQ in `extra` generators followed by t1..t_rank (lex order)."""
    names = list(extra) + [f"t{k}" for k in range(1, rank + 1)]
    return PolyRing(names, QQ, lex)


def to_fraction(value: Any) -> Fraction:
    """Convert a QQ ground element (or int) to a Fraction."""
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    return Fraction(int(value.numerator), int(value.denominator))


def to_ground(value: Scalar) -> Any:
    value = Fraction(value)
    return QQ(value.numerator, value.denominator)


def substitute(p: MultiPoly, images: Sequence[MultiPoly], target: PolyRing) -> MultiPoly:
    """Ring homomorphism sending the i-th generator of p's ring to images[i] in target."""
    if len(images) != p.ring.ngens:
        raise VariableSetMismatch(
            "substitution needs one image per generator",
            expected=p.ring.ngens,
            got=len(images),
        )
    result = target.zero
    for monom, coeff in p.items():
        term = target(coeff)
        for image, exponent in zip(images, monom):
            if exponent:
                term *= image**exponent
        result += term
    return result


def total_degrees(p: MultiPoly) -> set:
    return {sum(monom) for monom in p.keys()}


def is_homogeneous(p: MultiPoly, degree: Optional[int] = None) -> bool:
    degrees = total_degrees(p)
    if not degrees:
        return True
    if len(degrees) != 1:
        return False
    return degree is None or degrees.pop() == degree


def _check_rings(a: MultiPoly, b: MultiPoly) -> None:
    if a.ring != b.ring:
        raise VariableSetMismatch(
            "polynomials live in different rings",
            left=a.ring.symbols,
            right=b.ring.symbols,
        )


def poly_arithmetic(a: MultiPoly, b: Union[MultiPoly, Scalar], op: str) -> MultiPoly:
    """add | mul of two polynomials over the same variables, or scale by a rational."""
    if op == "scale":
        if isinstance(b, PolyElement):
            raise VariableSetMismatch("scale expects a rational factor")
        return a * to_ground(b)
    if not isinstance(b, PolyElement):
        raise VariableSetMismatch(f"{op} expects two polynomials")
    _check_rings(a, b)
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown polynomial operation: {op}")


# ========== CHARACTERS ==========
@dataclass(frozen=True, order=True)
class Character:
    """An integer vector of the character lattice, read as the linear form sum(c_k * t_k)."""

    coeffs: Tuple[int, ...]

    @classmethod
    def of(cls, *coeffs: int) -> "Character":
        return cls(tuple(int(c) for c in coeffs))

    @classmethod
    def zero(cls, rank: int) -> "Character":
        return cls((0,) * rank)

    @classmethod
    def basis(cls, rank: int, k: int) -> "Character":
        """The k-th coordinate character e_k, 1-based."""
        return cls(tuple(1 if j == k - 1 else 0 for j in range(rank)))

    @property
    def rank(self) -> int:
        return len(self.coeffs)

    def is_nonzero(self) -> bool:
        return any(self.coeffs)

    def _check_rank(self, other: "Character") -> None:
        if self.rank != other.rank:
            raise VariableSetMismatch(
                "characters of different torus ranks", left=self.rank, right=other.rank
            )

    def __add__(self, other: "Character") -> "Character":
        self._check_rank(other)
        return Character(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "Character") -> "Character":
        self._check_rank(other)
        return Character(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "Character":
        return Character(tuple(-a for a in self.coeffs))

    def scaled(self, k: int) -> "Character":
        return Character(tuple(k * a for a in self.coeffs))

    def primitive(self) -> Tuple[int, "Character"]:
        """Split into (signed content, primitive character with positive first entry)."""
        content = 0
        for a in self.coeffs:
            content = gcd(content, a)
        if content == 0:
            raise ValueError("the zero character has no primitive part")
        first = next(a for a in self.coeffs if a)
        unit = content if first > 0 else -content
        return unit, Character(tuple(a // unit for a in self.coeffs))

    def linear_form(self, ring: PolyRing) -> MultiPoly:
        """The character as a degree-1 polynomial; t-variables are the trailing generators."""
        if ring.ngens < self.rank:
            raise VariableSetMismatch("ring has fewer generators than the torus rank")
        gens = ring.gens[ring.ngens - self.rank :]
        form = ring.zero
        for coeff, gen in zip(self.coeffs, gens):
            if coeff:
                form += gen * coeff
        return form

    def __str__(self) -> str:
        return str(self.linear_form(torus_ring(self.rank)))


def divide_by_character(p: MultiPoly, chi: Character) -> MultiPoly:
    """Exact quotient p / chi; raises Indivisible when chi is not a factor."""
    if not chi.is_nonzero():
        raise Indivisible("cannot divide by the zero character")
    quotient, remainder = p.div(chi.linear_form(p.ring))
    if remainder:
        raise Indivisible(f"{chi} does not divide the polynomial", character=chi)
    return quotient


def elem_sym(chars: Sequence[Character], i: int, ring: Optional[PolyRing] = None) -> MultiPoly:
    """The i-th elementary symmetric polynomial in the linear forms of chars."""
    if ring is None:
        if not chars:
            raise ValueError("a ring is required for an empty character multiset")
        ring = torus_ring(chars[0].rank)
    if not 0 <= i <= len(chars):
        raise IndexOutOfRange(f"elementary symmetric index {i} outside 0..{len(chars)}")
    sums: List[MultiPoly] = [ring.one] + [ring.zero] * len(chars)
    for count, chi in enumerate(chars, start=1):
        form = chi.linear_form(ring)
        for k in range(min(count, i), 0, -1):
            sums[k] = sums[k] + sums[k - 1] * form
    return sums[i]


# ========== FACTORED AND LOCALIZED CLASSES ==========
def _canonical_factors(chars: Iterable[Character]) -> Tuple[Fraction, Tuple[Character, ...]]:
    scalar = Fraction(1)
    factors = []
    for chi in chars:
        if not chi.is_nonzero():
            raise ValueError("denominator factors must be nonzero characters")
        unit, prime = chi.primitive()
        scalar *= unit
        factors.append(prime)
    return scalar, tuple(sorted(factors))


def product_of(chars: Iterable[Character], ring: PolyRing) -> MultiPoly:
    result = ring.one
    for chi in chars:
        result *= chi.linear_form(ring)
    return result


@dataclass(frozen=True)
class FactoredClass:
    """A nonzero rational times a product of primitive characters (an Euler class at a point)."""

    scalar: Fraction
    factors: Tuple[Character, ...]

    def __post_init__(self) -> None:
        if self.scalar == 0:
            raise ValueError("factored classes have a nonzero scalar")
        unit, factors = _canonical_factors(self.factors)
        object.__setattr__(self, "scalar", Fraction(self.scalar) * unit)
        object.__setattr__(self, "factors", factors)

    @classmethod
    def from_characters(cls, chars: Iterable[Character], scalar: Scalar = 1) -> "FactoredClass":
        return cls(Fraction(scalar), tuple(chars))

    @property
    def degree(self) -> int:
        return len(self.factors)

    def as_poly(self, ring: PolyRing) -> MultiPoly:
        return product_of(self.factors, ring) * to_ground(self.scalar)

    def invert(self, ring: PolyRing) -> "LocalizedClass":
        return LocalizedClass(ring(to_ground(1 / self.scalar)), self.factors)

    def __str__(self) -> str:
        factors = " * ".join(f"({chi})" for chi in self.factors)
        if not factors:
            return str(self.scalar)
        return factors if self.scalar == 1 else f"{self.scalar} * {factors}"


def _normalize(
    numerator: MultiPoly, denominator: Iterable[Character]
) -> Tuple[MultiPoly, Tuple[Character, ...]]:
    unit, factors = _canonical_factors(denominator)
    if not numerator:
        return numerator, ()
    if unit != 1:
        numerator = numerator * to_ground(1 / unit)
    remaining: Counter = Counter(factors)
    for chi in sorted(remaining):
        while remaining[chi]:
            try:
                numerator = divide_by_character(numerator, chi)
            except Indivisible:
                break
            remaining[chi] -= 1
    return numerator, tuple(sorted(remaining.elements()))


@dataclass(frozen=True)
class LocalizedClass:
    """
    numerator / product(denominator), kept canonical: no denominator factor
    divides the numerator and the zero class has an empty denominator.
    """

    numerator: MultiPoly
    denominator: Tuple[Character, ...] = ()

    def __post_init__(self) -> None:
        numerator, denominator = _normalize(self.numerator, self.denominator)
        object.__setattr__(self, "numerator", numerator)
        object.__setattr__(self, "denominator", denominator)

    @classmethod
    def from_poly(cls, p: MultiPoly) -> "LocalizedClass":
        return cls(p, ())

    @classmethod
    def zero(cls, ring: PolyRing) -> "LocalizedClass":
        return cls(ring.zero, ())

    @property
    def ring(self) -> PolyRing:
        return self.numerator.ring

    @property
    def is_zero(self) -> bool:
        return not self.numerator

    def denominator_poly(self) -> MultiPoly:
        return product_of(self.denominator, self.ring)

    def _check(self, other: "LocalizedClass") -> None:
        _check_rings(self.numerator, other.numerator)

    def __add__(self, other: "LocalizedClass") -> "LocalizedClass":
        self._check(other)
        mine, theirs = Counter(self.denominator), Counter(other.denominator)
        common = mine | theirs
        numerator = self.numerator * product_of((common - mine).elements(), self.ring)
        numerator += other.numerator * product_of((common - theirs).elements(), self.ring)
        return LocalizedClass(numerator, tuple(common.elements()))

    def __neg__(self) -> "LocalizedClass":
        return LocalizedClass(-self.numerator, self.denominator)

    def __sub__(self, other: "LocalizedClass") -> "LocalizedClass":
        return self + (-other)

    def __mul__(self, other: "LocalizedClass") -> "LocalizedClass":
        self._check(other)
        return LocalizedClass(self.numerator * other.numerator, self.denominator + other.denominator)

    def scale(self, factor: Scalar) -> "LocalizedClass":
        return LocalizedClass(self.numerator * to_ground(factor), self.denominator)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LocalizedClass):
            return NotImplemented
        return (
            self.ring == other.ring
            and self.numerator == other.numerator
            and self.denominator == other.denominator
        )

    def __hash__(self) -> int:
        return hash((tuple(sorted(self.numerator.items())), self.denominator))

    def evaluate(self, point: Sequence[int]) -> Fraction:
        """Value at an integer point of the t-variables."""
        denominator = Fraction(1)
        for chi in self.denominator:
            value = sum(c * x for c, x in zip(chi.coeffs, point))
            if value == 0:
                raise DenominatorVanishes(f"{chi} vanishes at {tuple(point)}")
            denominator *= value
        return to_fraction(self.numerator(*point)) / denominator

    def __str__(self) -> str:
        if not self.denominator:
            return str(self.numerator)
        factors = " * ".join(f"({chi})" for chi in self.denominator)
        return f"({self.numerator}) / ({factors})"


def fraction_arithmetic(a: LocalizedClass, b: LocalizedClass, op: str) -> LocalizedClass:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown fraction operation: {op}")


def invert(f: FactoredClass, ring: PolyRing) -> LocalizedClass:
    return f.invert(ring)


# ========== CONSTANTS AND GENERIC POINTS ==========
def sample_point(rank: int, rng: random.Random, bound: int) -> Tuple[int, ...]:
    return tuple(rng.randint(-bound, bound) for _ in range(rank))


def evaluate_generic(
    classes: Sequence[LocalizedClass],
    rng: random.Random,
    max_resamples: int = 8,
    bound: int = 97,
) -> Tuple[Tuple[int, ...], List[Fraction]]:
    """Evaluate all classes at one random integer point where no denominator vanishes."""
    if not classes:
        return (), []
    rank = classes[0].ring.ngens
    for attempt in range(max_resamples):
        point = sample_point(rank, rng, bound)
        try:
            return point, [cls.evaluate(point) for cls in classes]
        except DenominatorVanishes:
            logger.warning("denominator vanishes at %s, resampling (attempt %d)", point, attempt + 1)
    raise DenominatorVanishes(
        f"no generic point found after {max_resamples} samples", retries=max_resamples
    )


def constant_value(
    f: LocalizedClass,
    rng: Optional[random.Random] = None,
    max_resamples: int = 8,
    bound: int = 97,
) -> Fraction:
    """
    The rational c with numerator == c * product(denominator).
    The polynomial identity decides; two generic evaluations cross-check it.
    """
    if f.is_zero:
        return Fraction(0)
    degrees = total_degrees(f.numerator)
    if degrees != {len(f.denominator)}:
        raise DegreeMismatch(
            "class is not homogeneous of degree 0",
            numerator_degrees=sorted(degrees),
            denominator_degree=len(f.denominator),
        )
    denominator = f.denominator_poly()
    value = to_fraction(f.numerator.LC) / to_fraction(denominator.LC)
    residual = f.numerator - denominator * to_ground(value)
    if residual:
        raise NotConstant(f"{f} is not a rational constant", residual=residual)
    rng = rng or random.Random(0)
    for _ in range(2):
        point, (sampled,) = evaluate_generic([f], rng, max_resamples, bound)
        if sampled != value:
            raise NotConstant(
                f"value {sampled} at {point} disagrees with {value}", point=point
            )
    return value
