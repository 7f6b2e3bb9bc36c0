"""
Service-level tests for the localization engine and Schubert calculus
Residues on projective spaces and singular subvarieties, and Schubert classes on flag varieties
"""
import random
import time
from fractions import Fraction
from math import comb

import pytest

from app.config import EngineSettings
from app.errors import (
    CalibrationFailed,
    DegreeMismatch,
    InconsistentExpansion,
    NonFactorablePivot,
    NonTriangularBasis,
    SubstitutionMismatch,
    VanishingCheckFailed,
)
from app.services import schubert
from app.services.bundles import (
    ChernMonomial,
    ChernFactor,
    ChernPolynomial,
    line_bundle,
    tangent_bundle,
)
from app.services.localize import LocalizationService, ResidueReport, factor_pivot
from app.services.schubert import (
    REVERSED,
    STANDARD,
    Convention,
    DoubleClass,
    Permutation,
    TypeARootData,
    bruhat_leq,
    c_w_class,
    calibrate,
    calibrated_convention,
    descendant_class,
    double_ring,
    double_schubert,
    equivariant_multiplicity,
    flag_fixed_points,
    flag_line_bundle,
    flag_restriction_table,
    restrict_double,
    schubert_localize,
    top_class,
    weyl_ops,
)
from app.services.symalg import (
    Character,
    FactoredClass,
    LocalizedClass,
    is_homogeneous,
    torus_ring,
)
from app.services.torusgeom import (
    EquivariantClass,
    ProjectiveSpaceAction,
    hypersurface_class,
    hypersurface_fixed_locus,
    point_class,
    projective_fixed_points,
    restrict_class,
)


def random_action(n: int, rng: random.Random) -> ProjectiveSpaceAction:
    return ProjectiveSpaceAction.from_vectors([[w] for w in rng.sample(range(-30, 31), n + 1)])


def ordinary_chern_number(n: int, indices) -> int:
    """deg of prod c_i(T_{P^n}) from (1+h)^(n+1): c_i = C(n+1, i) h^i."""
    value = 1
    for i in indices:
        value *= comb(n + 1, i)
    return value


def tangent_monomial(indices) -> ChernPolynomial:
    return ChernPolynomial.of(
        ChernMonomial(Fraction(1), tuple(ChernFactor("T", i) for i in indices))
    )


def random_class(action: ProjectiveSpaceAction, rng: random.Random) -> EquivariantClass:
    h = action.h
    t = action.ring.gens[1:]
    poly = action.ring.zero
    for _ in range(rng.randint(1, 5)):
        term = action.ring(rng.randint(-9, 9)) * h ** rng.randint(0, action.n)
        for gen in t:
            term *= gen ** rng.randint(0, 2)
        poly += term
    return EquivariantClass(poly, action)


# ============================================================================
# INTEGRATION AND SMOOTH RESIDUE TESTS
# ============================================================================

class TestBottResidue:
    """Test suite for Euler classes, integration and the smooth residue formula"""

    @pytest.fixture
    def p1(self):
        return ProjectiveSpaceAction.from_vectors([[0], [1]])

    def test_euler_class_of_p1(self, service, p1):
        space = projective_fixed_points(p1)
        assert service.euler_class(space, "p0") == FactoredClass.from_characters([Character.of(1)])

    def test_euler_class_of_quadric_point(self, service, quadric_action):
        space = projective_fixed_points(quadric_action)
        euler = service.euler_class(space, "Ps")
        expected = FactoredClass.from_characters(
            [Character.of(1, -1), Character.of(-1, -1), Character.of(0, -1)]
        )
        assert euler == expected

    def test_integrate_point_class(self, service, quadric_action):
        space = projective_fixed_points(quadric_action)
        for point_id in space.ids:
            cls = point_class(quadric_action, point_id)
            values = {q: restrict_class(cls, q) for q in space.ids}
            assert service.integrate(space, values) == LocalizedClass.from_poly(space.base_ring.one)

    def test_integrate_hyperplane_on_p1(self, service, p1):
        space = projective_fixed_points(p1)
        t1 = space.base_ring.gens[0]
        total = service.integrate(space, {"p0": space.base_ring.zero, "p1": -t1})
        assert total == LocalizedClass.from_poly(space.base_ring.one)

    def test_c1_of_p1(self, service, p1):
        space = projective_fixed_points(p1)
        bundles = {"T": tangent_bundle(space)}
        assert service.bott_residue(space, bundles, tangent_monomial([1])) == 2

    @pytest.mark.parametrize(
        "n,indices",
        [
            (1, [1]),
            (2, [1, 1]),
            (2, [2]),
            (3, [3]),
            (3, [1, 2]),
            (4, [4]),
            (4, [2, 2]),
        ],
    )
    def test_against_ordinary_chow_ring(self, service, n, indices):
        rng = random.Random(1000 + n)
        expected = ordinary_chern_number(n, indices)
        for _ in range(10):
            space = projective_fixed_points(random_action(n, rng))
            bundles = {"T": tangent_bundle(space)}
            assert service.bott_residue(space, bundles, tangent_monomial(indices)) == expected

    def test_top_chern_class_is_euler_characteristic(self, service):
        rng = random.Random(5)
        for n in range(1, 5):
            space = projective_fixed_points(random_action(n, rng))
            bundles = {"T": tangent_bundle(space)}
            assert service.bott_residue(space, bundles, tangent_monomial([n])) == n + 1

    def test_degree_mismatch(self, service):
        space = projective_fixed_points(ProjectiveSpaceAction.from_vectors([[0], [1], [3]]))
        with pytest.raises(DegreeMismatch):
            service.bott_residue(space, {"T": tangent_bundle(space)}, tangent_monomial([1]))

    @pytest.mark.slow
    def test_degree_deficit_vanishes(self, service):
        rng = random.Random(42)
        for _ in range(100):
            n = rng.randint(2, 4)
            action = random_action(n, rng)
            space = projective_fixed_points(action)
            bundles = {
                "T": tangent_bundle(space),
                "L": line_bundle(action, rng.randint(-3, 3), Character.of(rng.randint(-5, 5))),
            }
            degree = rng.randint(0, n - 1)
            factors = []
            while sum(f.index for f in factors) < degree:
                name = rng.choice(["T", "L"])
                top = min(bundles[name].rank, degree - sum(f.index for f in factors))
                factors.append(ChernFactor(name, rng.randint(1, top)))
            poly = ChernPolynomial.of(ChernMonomial(Fraction(rng.randint(1, 5)), tuple(factors)))
            assert service.integrate_polynomial(space, bundles, poly).is_zero

    def test_weight_independence(self, service):
        rng = random.Random(3)
        poly = ChernPolynomial.of(
            ChernMonomial(Fraction(1), (ChernFactor("T", 1), ChernFactor("L", 1), ChernFactor("T", 1))),
            ChernMonomial(Fraction(-2), (ChernFactor("T", 3),)),
        )
        values = set()
        for _ in range(3):
            action = random_action(3, rng)
            space = projective_fixed_points(action)
            bundles = {"T": tangent_bundle(space), "L": line_bundle(action, 2, Character.of(0))}
            values.add(service.bott_residue(space, bundles, poly))
        # c1^2 * 2h on P^3 is 32, c3 is 4
        assert values == {Fraction(32 - 8)}

    def test_p5_is_fast(self, service):
        rng = random.Random(11)
        space = projective_fixed_points(random_action(5, rng))
        bundles = {"T": tangent_bundle(space)}
        start = time.perf_counter()
        value = service.bott_residue(space, bundles, tangent_monomial([1, 1, 1, 1, 1]))
        assert value == 6**5
        assert time.perf_counter() - start < 5

    def test_threads_do_not_change_results(self, quadric_inputs):
        action, gamma, on_x, bundles, poly, dim_x = quadric_inputs()
        serial = LocalizationService().singular_report(action, gamma, on_x, bundles, poly, dim_x)
        threaded = LocalizationService(EngineSettings(max_workers=4)).singular_report(
            action, gamma, on_x, bundles, poly, dim_x
        )
        assert serial.value == threaded.value
        assert list(serial.contributions) == list(threaded.contributions)
        assert {k: str(v) for k, v in serial.contributions.items()} == {
            k: str(v) for k, v in threaded.contributions.items()
        }


# ============================================================================
# LOCALIZATION TABLE TESTS
# ============================================================================

class TestLocalization:
    """Test suite for explicit localization, reconstruction and basis expansion"""

    @pytest.fixture
    def base(self, quadric_action):
        return quadric_action.base_ring

    def test_fundamental_class_of_quadric(self, service, quadric_action, base):
        two_h = hypersurface_class(quadric_action, [(2, Character.zero(2))])
        table = service.localize_class(quadric_action, two_h)
        # t^2 (a^2 - 1) = (t2 - t1)(t2 + t1)
        assert table["Ps"] == LocalizedClass(base(2), (Character.of(-1, 1), Character.of(1, 1)))
        assert table["P"] == LocalizedClass(-base.one, (Character.of(-1, 1), Character.of(1, 0)))
        assert table["P'"] == LocalizedClass(base.one, (Character.of(1, 0), Character.of(1, 1)))
        assert table["Q4"].is_zero
        assert table.support() == ["P", "P'", "Ps"]

    def test_line_class_of_quadric(self, service, quadric_action):
        h, t1, _ = quadric_action.ring.gens
        line = EquivariantClass(h**2 - t1 * h, quadric_action)
        base = quadric_action.base_ring
        table = service.localize_class(quadric_action, line)
        assert table["Ps"] == LocalizedClass(-base.one, (Character.of(-1, 1),))
        assert table["P"] == LocalizedClass(base.one, (Character.of(-1, 1),))
        assert table["P'"].is_zero
        assert table["Q4"].is_zero

    def test_point_class_table(self, service, quadric_action, base):
        table = service.localize_class(quadric_action, point_class(quadric_action, "P'"))
        assert table["P'"] == LocalizedClass.from_poly(base.one)
        assert table.support() == ["P'"]

    def test_euler_class_is_self_restriction(self, service, quadric_action):
        space = projective_fixed_points(quadric_action)
        for point_id in space.ids:
            restricted = restrict_class(point_class(quadric_action, point_id), point_id)
            assert service.euler_class(space, point_id).as_poly(space.base_ring) == restricted

    def test_reconstruction(self, service, quadric_action):
        two_h = hypersurface_class(quadric_action, [(2, Character.zero(2))])
        table = service.localize_class(quadric_action, two_h)
        assert service.verify_localization(quadric_action, two_h, table).passed

    def test_perturbed_table_fails(self, service, quadric_action, base):
        two_h = hypersurface_class(quadric_action, [(2, Character.zero(2))])
        table = service.localize_class(quadric_action, two_h)
        perturbed = table.with_entry("Ps", table["Ps"] + LocalizedClass.from_poly(base.one))
        result = service.verify_localization(quadric_action, two_h, perturbed)
        assert not result.passed
        assert not result.residual.is_zero

    @pytest.mark.slow
    def test_reconstruction_of_random_classes(self, service):
        rng = random.Random(2024)
        for _ in range(100):
            action = random_action(rng.randint(1, 4), rng)
            alpha = random_class(action, rng)
            table = service.localize_class(action, alpha)
            assert service.verify_localization(action, alpha, table).passed

    def test_equivariant_degree(self, service, quadric_action):
        h = quadric_action.h
        assert service.equivariant_degree(quadric_action, EquivariantClass(h**3, quadric_action)) == 1
        two_h = hypersurface_class(quadric_action, [(2, Character.zero(2))])
        line = EquivariantClass(h**2, quadric_action)
        assert service.equivariant_degree(quadric_action, two_h * line) == 2

    def test_equivariant_degree_requires_top_degree(self, service, quadric_action):
        with pytest.raises(DegreeMismatch):
            service.equivariant_degree(quadric_action, EquivariantClass(quadric_action.h, quadric_action))


class TestBasisExpansion:
    """Test suite for back-substitution in the cell basis of the quadric"""

    @pytest.fixture
    def basis(self, quadric_action):
        h, t1, _ = quadric_action.ring.gens
        return [
            point_class(quadric_action, "Ps"),
            EquivariantClass(h**2 - t1 * h, quadric_action),
            hypersurface_class(quadric_action, [(2, Character.zero(2))]),
        ]

    def test_expand_p(self, service, quadric_action, basis):
        t1, t2 = quadric_action.base_ring.gens
        coefficients = service.expand_in_basis(basis, point_class(quadric_action, "P"))
        assert coefficients == [
            LocalizedClass.from_poly(quadric_action.base_ring.one),
            LocalizedClass.from_poly(t2 - t1),
            LocalizedClass.zero(quadric_action.base_ring),
        ]

    def test_expand_p_prime(self, service, quadric_action, basis):
        t1, t2 = quadric_action.base_ring.gens
        coefficients = service.expand_in_basis(basis, point_class(quadric_action, "P'"))
        assert coefficients == [
            LocalizedClass.from_poly(quadric_action.base_ring.one),
            LocalizedClass.from_poly(t1 + t2),
            LocalizedClass.from_poly(t1 * (t1 + t2)),
        ]

    def test_expand_ps(self, service, quadric_action, basis):
        base = quadric_action.base_ring
        coefficients = service.expand_in_basis(basis, point_class(quadric_action, "Ps"))
        assert coefficients == [
            LocalizedClass.from_poly(base.one),
            LocalizedClass.zero(base),
            LocalizedClass.zero(base),
        ]

    def test_non_triangular_basis(self, service, quadric_action):
        h = quadric_action.h
        basis = [EquivariantClass(h, quadric_action), EquivariantClass(h * 2, quadric_action)]
        with pytest.raises(NonTriangularBasis):
            service.expand_in_basis(basis, EquivariantClass(h, quadric_action))

    def test_inconsistent_target(self, service, quadric_action):
        with pytest.raises(InconsistentExpansion):
            service.expand_in_basis(
                [point_class(quadric_action, "Ps")],
                EquivariantClass(quadric_action.h, quadric_action),
            )

    def test_pivot_must_factor(self, service, quadric_action):
        h, t1, t2 = quadric_action.ring.gens
        basis = [EquivariantClass((t1**2 + t2**2) * h, quadric_action)]
        with pytest.raises(NonFactorablePivot):
            service.expand_in_basis(basis, EquivariantClass(h, quadric_action))

    def test_factor_pivot(self, quadric_action):
        t1, t2 = quadric_action.base_ring.gens
        pivot = factor_pivot((t2 + t1) * t1**2 * 3)
        assert pivot == FactoredClass.from_characters(
            [Character.of(1, 1), Character.of(1, 0), Character.of(1, 0)], 3
        )


# ============================================================================
# SINGULAR RESIDUE TESTS
# ============================================================================

class TestSingularResidue:
    """Test suite for residues over a singular subvariety given by its class"""

    def test_quadric_is_24(self, service, quadric_inputs):
        start = time.perf_counter()
        assert service.singular_chern_number(*quadric_inputs()) == 24
        assert time.perf_counter() - start < 1

    @pytest.mark.parametrize("a", [2, 3, 5, -2])
    def test_quadric_integer_substitutions(self, service, quadric_inputs, a):
        weights = [[1], [-1], [0], [a]]
        assert service.singular_chern_number(*quadric_inputs(weights)) == 24

    def test_quadric_contributions(self, service, quadric_inputs):
        report = service.singular_report(*quadric_inputs())
        ring = torus_ring(2)
        t1, t2 = ring.gens
        assert list(report.contributions) == ["Ps", "P", "P'"]
        assert report.contributions["Ps"] == LocalizedClass(
            t2**2 * -12, (Character.of(1, -1), Character.of(1, 1))
        )
        assert report.contributions["P"] == LocalizedClass(
            (t1 * 4 - t2) * (t1 * 3 - t2), (Character.of(1, 0), Character.of(1, -1))
        )
        assert report.contributions["P'"] == LocalizedClass(
            (t1 * 4 + t2) * (t1 * 3 + t2), (Character.of(1, 0), Character.of(1, 1))
        )
        names = [v.name for v in report.validations]
        assert "vanishing(Q4)" in names
        vanishing = next(v for v in report.validations if v.name == "vanishing(Q4)")
        assert vanishing.detail == "validated (necessary condition)"

    def test_vanishing_check(self, service, quadric_inputs):
        action, gamma, _, bundles, poly, dim_x = quadric_inputs()
        with pytest.raises(VanishingCheckFailed):
            service.singular_chern_number(action, gamma, ["Ps", "P'"], bundles, poly, dim_x)

    def test_polynomial_degree_must_match(self, service, quadric_inputs):
        action, gamma, on_x, bundles, _, _ = quadric_inputs()
        poly = ChernPolynomial.monomial(("fT", 1, 1))
        with pytest.raises(DegreeMismatch):
            service.singular_chern_number(action, gamma, on_x, bundles, poly, 2)

    def test_class_degree_must_match(self, service, quadric_inputs):
        action, _, on_x, bundles, poly, dim_x = quadric_inputs()
        gamma = EquivariantClass(action.h**2, action)
        with pytest.raises(DegreeMismatch):
            service.singular_chern_number(action, gamma, on_x, bundles, poly, dim_x)

    def test_conic(self, service):
        action = ProjectiveSpaceAction.from_vectors([[1], [-1], [0]])
        gamma = hypersurface_class(action, [(2, Character.of(0))])
        bundles = {"fT": tangent_bundle(projective_fixed_points(action))}
        poly = ChernPolynomial.monomial(("fT", 1, 1))
        assert service.singular_chern_number(action, gamma, ["p0", "p1"], bundles, poly, 1) == 6

    def test_hyperplane_in_p1(self, service):
        action = ProjectiveSpaceAction.from_vectors([[2], [5]])
        gamma = hypersurface_class(action, [(1, Character.of(2))])
        poly = ChernPolynomial.monomial()
        assert service.singular_chern_number(action, gamma, ["p1"], {}, poly, 0) == 1

    def test_fundamental_class_matches_smooth_residue(self, service):
        rng = random.Random(9)
        action = random_action(3, rng)
        space = projective_fixed_points(action)
        bundles = {"T": tangent_bundle(space)}
        poly = tangent_monomial([1, 2])
        smooth = service.bott_residue(space, bundles, poly)
        singular = service.singular_chern_number(
            action, EquivariantClass.one(action), space.ids, bundles, poly, 3
        )
        assert smooth == singular == 24

    @pytest.mark.parametrize(
        "weights,d,chi_f,on_x",
        [
            ([[1], [-1], [0]], 2, 0, ["p0", "p1"]),
            ([[0], [1], [4], [5]], 2, 5, ["p0", "p1", "p2", "p3"]),
        ],
    )
    def test_hypersurface_cross_check(self, service, weights, d, chi_f, on_x):
        action = ProjectiveSpaceAction.from_vectors(weights)
        ambient = projective_fixed_points(action)
        locus = hypersurface_fixed_locus(action, d, Character.of(chi_f), on_x)
        gamma = hypersurface_class(action, [(d, Character.of(chi_f))])
        bundles = {
            "T": tangent_bundle(ambient).restrict_to(on_x),
            "L": line_bundle(action, 1, Character.of(0)).restrict_to(on_x),
        }
        dim_x = locus.dim
        polys = [tangent_monomial([1] * dim_x)]
        if dim_x == 2:
            polys.append(ChernPolynomial.monomial(("T", 1, 1), ("L", 1, 1)))
        for poly in polys:
            direct = service.bott_residue(locus, bundles, poly)
            via_class = service.singular_chern_number(action, gamma, on_x, bundles, poly, dim_x)
            assert direct == via_class

    def test_smooth_quadric_values(self, service):
        action = ProjectiveSpaceAction.from_vectors([[0], [1], [4], [5]])
        gamma = hypersurface_class(action, [(2, Character.of(5))])
        bundles = {
            "T": tangent_bundle(projective_fixed_points(action)),
            "L": line_bundle(action, 1, Character.of(0)),
        }
        ids = action.ids
        c1_squared = ChernPolynomial.monomial(("T", 1, 2))
        c1_h = ChernPolynomial.monomial(("T", 1, 1), ("L", 1, 1))
        assert service.singular_chern_number(action, gamma, ids, bundles, c1_squared, 2) == 32
        assert service.singular_chern_number(action, gamma, ids, bundles, c1_h, 2) == 8

    def test_substitution_check(self, quadric_inputs):
        service = LocalizationService(EngineSettings(check_substitutions=3, seed=5))
        report = service.singular_report(*quadric_inputs())
        names = [v.name for v in report.validations]
        assert names[-3:] == ["substitution(1)", "substitution(2)", "substitution(3)"]

    def test_substitution_mismatch(self, service, quadric_inputs):
        report = service.singular_report(*quadric_inputs())
        wrong = ResidueReport(Fraction(23), report.contributions, report.total)
        with pytest.raises(SubstitutionMismatch):
            service.substitution_check(wrong, 1)


# ============================================================================
# SCHUBERT CALCULUS TESTS
# ============================================================================

class TestWeylGroup:
    """Test suite for symmetric group combinatorics"""

    def test_s3(self):
        group = weyl_ops(3)
        assert len(group.elements) == 6
        assert group.length(group.longest) == 3
        assert group.sign(group.longest) == -1
        assert all(group.leq(group.identity, w) for w in group.elements)
        assert all(group.leq(w, group.longest) for w in group.elements)

    def test_bruhat_is_a_partial_order(self):
        elements = weyl_ops(4).elements
        for u in elements:
            assert bruhat_leq(u, u)
            for w in elements:
                if u != w and bruhat_leq(u, w):
                    assert not bruhat_leq(w, u)
                    assert u.length < w.length

    def test_simple_transpositions_are_incomparable(self):
        s1, s2 = Permutation.simple(3, 1), Permutation.simple(3, 2)
        assert not bruhat_leq(s1, s2)
        assert not bruhat_leq(s2, s1)

    def test_composition_and_inverse(self):
        w = Permutation.from_id("231")
        assert (w * w.inverse()) == Permutation.identity(3)
        assert w.inverse().id == "312"
        assert w(1) == 2

    def test_weyl_action_on_characters(self):
        w = Permutation.from_id("231")
        assert w.act(Character.basis(3, 1)) == Character.basis(3, 2)
        assert w.act(Character.basis(3, 3)) == Character.basis(3, 1)


class TestFlagVariety:
    """Test suite for fixed points and Euler classes of flag varieties"""

    def test_fl2_tangent_weights(self):
        space = flag_fixed_points(2)
        assert space.tangent("12") == (Character.of(-1, 1),)
        assert space.tangent("21") == (Character.of(1, -1),)

    def test_fl3_shape(self):
        space = flag_fixed_points(3)
        assert len(space.points) == 6
        assert space.dim == 3
        assert TypeARootData(3).count == 3

    def test_c_w_for_fl2(self):
        e, s = Permutation.identity(2), Permutation.longest(2)
        assert c_w_class(2, e) == FactoredClass.from_characters([Character.of(1, -1)], -1)
        assert c_w_class(2, s) == FactoredClass.from_characters([Character.of(1, -1)])

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_c_w_equals_tangent_product(self, n):
        space = flag_fixed_points(n)
        for w in weyl_ops(n).elements:
            assert c_w_class(n, w) == FactoredClass.from_characters(space.tangent(w.id))

    def test_euler_characteristic_of_fl3(self, service):
        space = flag_fixed_points(3)
        bundles = {"T": tangent_bundle(space)}
        assert service.bott_residue(space, bundles, ChernPolynomial.monomial(("T", 3, 1))) == 6


class TestDoubleClasses:
    """Test suite for double classes and their restrictions"""

    def test_top_class_for_n2(self):
        x1, x2, y1, y2 = double_ring(2).gens
        assert top_class(2, STANDARD) == x1 - y1
        assert top_class(2, REVERSED) == x2 - y1

    def test_divided_difference_chain(self):
        for sigma in weyl_ops(3).elements:
            cls = descendant_class(3, sigma, STANDARD)
            assert cls.degree == sigma.length
            assert is_homogeneous(cls.poly, cls.degree)
        assert descendant_class(2, Permutation.identity(2), STANDARD).poly == double_ring(2).one

    def test_degree_is_codimension(self):
        group = weyl_ops(3)
        for v in group.elements:
            F = double_schubert(3, v)
            codim = group.length(group.longest) - v.length
            assert F.degree == codim
            assert is_homogeneous(F.poly, codim)
        product = double_schubert(3, Permutation.from_id("213")) * double_schubert(3, Permutation.from_id("132"))
        assert product.degree == 4
        assert is_homogeneous(product.poly, 4)

    def test_fundamental_class_is_one(self):
        for n in (2, 3):
            F = double_schubert(n, Permutation.longest(n))
            assert F.poly == double_ring(n).one
            assert F.degree == 0

    def test_point_class_degree(self):
        F = double_schubert(3, Permutation.identity(3))
        assert F.degree == 3
        assert is_homogeneous(F.poly, 3)

    def test_restrict_top_class(self):
        t1, t2 = torus_ring(2).gens
        F = DoubleClass(2, top_class(2, STANDARD), 1)
        assert restrict_double(F, Permutation.longest(2)) == t1 - t2

    def test_restrict_pure_x_class(self):
        ring = double_ring(3)
        F = DoubleClass(3, ring.gens[0] * 2 - ring.gens[2], 1)
        t1, _, t3 = torus_ring(3).gens
        for u in weyl_ops(3).elements:
            assert restrict_double(F, u) == t1 * 2 - t3

    def test_restrict_pure_y_class_matches_line_bundle(self):
        ring = double_ring(3)
        lam = Character.of(2, -1, 5)
        F = DoubleClass(3, ring.gens[3] * 2 - ring.gens[4] + ring.gens[5] * 5, 1)
        space = flag_fixed_points(3)
        bundle = flag_line_bundle(space, lam)
        for u in weyl_ops(3).elements:
            (fiber,) = bundle.weights(u.id)
            assert fiber == u.act(lam)
            assert restrict_double(F, u) == fiber.linear_form(torus_ring(3))

    def test_restriction_is_a_ring_map(self):
        F = double_schubert(3, Permutation.from_id("213"))
        G = double_schubert(3, Permutation.from_id("132"))
        for u in weyl_ops(3).elements:
            assert restrict_double(F * G, u) == restrict_double(F, u) * restrict_double(G, u)

    def test_support(self):
        for v in weyl_ops(3).elements:
            table = flag_restriction_table(3, double_schubert(3, v))
            for u in weyl_ops(3).elements:
                if not bruhat_leq(u, v):
                    assert not table[u.id]


class TestSchubertLocalization:
    """Test suite for calibration and localization of Schubert classes"""

    def test_exactly_one_convention(self):
        report = calibrate((2, 3))
        passing = [r for r in report.results if r.passed]
        assert len(report.results) == 32
        assert len(passing) == 1
        assert report.chosen == Convention(REVERSED, "w0*v^-1", "u", True)

    @pytest.mark.slow
    def test_calibration_on_s4(self):
        assert calibrate((2, 3, 4)).chosen == calibrated_convention()

    def test_calibration_failure(self, monkeypatch):
        duplicate = Convention(REVERSED, "w0*v^-1", "u", True)
        monkeypatch.setattr(schubert, "CANDIDATES", (duplicate, duplicate))
        with pytest.raises(CalibrationFailed):
            calibrate((2,))
        monkeypatch.setattr(schubert, "CANDIDATES", ())
        with pytest.raises(CalibrationFailed):
            calibrate((2,))

    @pytest.mark.parametrize("n", [2, 3])
    def test_fundamental_class_table(self, n):
        space = flag_fixed_points(n)
        table = schubert_localize(n, Permutation.longest(n))
        for u in weyl_ops(n).elements:
            expected = FactoredClass.from_characters(space.tangent(u.id)).invert(space.base_ring)
            assert table[u.id] == expected
            assert equivariant_multiplicity(n, Permutation.longest(n), u) == expected

    @pytest.mark.parametrize("n", [2, 3])
    def test_point_class_table(self, n):
        table = schubert_localize(n, Permutation.identity(n))
        assert table.support() == [Permutation.identity(n).id]
        assert table[Permutation.identity(n).id] == LocalizedClass.from_poly(torus_ring(n).one)

    def test_table_vanishes_outside_interval(self):
        v = Permutation.from_id("213")
        table = schubert_localize(3, v)
        assert sorted(table.support()) == ["123", "213"]

    def test_fl2_matches_p1(self, service):
        action = ProjectiveSpaceAction.from_vectors([[1, 0], [0, 1]])
        points = {"p0": "12", "p1": "21"}
        point_table = service.localize_class(action, point_class(action, "p0"))
        fundamental = service.localize_class(action, EquivariantClass.one(action))
        schubert_point = schubert_localize(2, Permutation.identity(2))
        schubert_fundamental = schubert_localize(2, Permutation.longest(2))
        for p, u in points.items():
            assert point_table[p] == schubert_point[u]
            assert fundamental[p] == schubert_fundamental[u]

    def test_divisor_multiplicity(self):
        # tangent at p_231 is (t3 - t2), (t1 - t2), (t1 - t3); only t3 - t2 is normal to X_231
        v = Permutation.from_id("231")
        space = flag_fixed_points(3)
        assert sorted(space.tangent(v.id)) == sorted(
            [Character.of(0, -1, 1), Character.of(1, -1, 0), Character.of(1, 0, -1)]
        )
        along = [Character.of(1, -1, 0), Character.of(1, 0, -1)]
        beta = equivariant_multiplicity(3, v, v)
        assert beta == FactoredClass.from_characters(along).invert(space.base_ring)
