"""
Scenario files: parsing, semantic validation, building engine objects and
running them into a RunReport.
"""
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from pydantic import ValidationError

from app.config import DEFAULT_SETTINGS, EngineSettings
from app.errors import (
    DegreeMismatch,
    EquilocError,
    IndexOutOfRange,
    ReconstructionFailed,
    ScenarioParseError,
    ScenarioValidationError,
    UndefinedBundle,
    UnmappedPoint,
    VariableSetMismatch,
)
from app.models.schemas import (
    BaseBundleSpec,
    ClassSpec,
    ExplicitBundleSpec,
    FlagLineBundleSpec,
    FlagSpaceSpec,
    LineBundleSpec,
    PullbackBundleSpec,
    RunReport,
    Scenario,
    SpaceSpec,
    TangentBundleSpec,
    ValidationRecord,
)
from app.services.bundles import (
    ChernFactor,
    ChernMonomial,
    ChernPolynomial,
    EquivariantBundle,
    line_bundle,
    pullback_bundle,
    tangent_bundle,
)
from app.services.localize import LocalizationService, ResidueReport, Validation
from app.services.schubert import (
    Permutation,
    bruhat_leq,
    calibrated_convention,
    double_schubert,
    flag_fixed_points,
    flag_restriction_table,
    flag_line_bundle,
    schubert_localize,
)
from app.services.symalg import Character, is_homogeneous, to_ground
from app.services.torusgeom import (
    EquivariantClass,
    FixedPointSpace,
    ProjectiveSpaceAction,
    hypersurface_class,
    projective_fixed_points,
)

logger = logging.getLogger(__name__)


def format_validation_error(error: ValidationError) -> str:
    error_messages = []
    for err in error.errors():
        path = ".".join(str(part) for part in err["loc"]) or "document"
        error_messages.append(f"{path}: {err['msg']}")
    return "Validation Error: " + "; ".join(error_messages)


@dataclass
class BuiltSpace:
    space: FixedPointSpace
    action: Optional[ProjectiveSpaceAction] = None


@dataclass
class BuiltScenario:
    scenario: Scenario
    main: Optional[BuiltSpace] = None
    bundles: Dict[str, EquivariantBundle] = field(default_factory=dict)
    poly: Optional[ChernPolynomial] = None
    cls: Optional[EquivariantClass] = None


# ========== BUILDING ==========
def _character(vector: List[int], rank: int) -> Character:
    if len(vector) != rank:
        raise VariableSetMismatch(f"character {vector} does not have torus rank {rank}")
    return Character.of(*vector)


def _build_space(spec: SpaceSpec, rank: int) -> BuiltSpace:
    if isinstance(spec, FlagSpaceSpec):
        if spec.n != rank:
            raise VariableSetMismatch(f"flag variety Fl_{spec.n} needs torus rank {spec.n}, got {rank}")
        return BuiltSpace(flag_fixed_points(spec.n))
    for vector in spec.weights:
        _character(vector, rank)
    action = ProjectiveSpaceAction.from_vectors(spec.weights, spec.labels)
    return BuiltSpace(projective_fixed_points(action), action)


def _build_bundle(spec: BaseBundleSpec, built: BuiltSpace, rank: int) -> EquivariantBundle:
    if isinstance(spec, TangentBundleSpec):
        return tangent_bundle(built.space)
    if isinstance(spec, LineBundleSpec):
        if built.action is None:
            raise VariableSetMismatch("line bundles O(d) need a projective space")
        return line_bundle(built.action, spec.degree, _character(spec.chi, rank))
    if isinstance(spec, FlagLineBundleSpec):
        if built.action is not None:
            raise VariableSetMismatch("flag line bundles need a flag variety")
        return flag_line_bundle(built.space, _character(spec.lam, rank))
    if isinstance(spec, ExplicitBundleSpec):
        for point_id in spec.fibers:
            built.space.point(point_id)
        fibers = {
            point_id: tuple(_character(vector, rank) for vector in chars)
            for point_id, chars in spec.fibers.items()
        }
        return EquivariantBundle(len(next(iter(fibers.values()))), rank, fibers)
    raise TypeError(f"unsupported bundle descriptor {spec.kind!r}")


def _build_class(spec: ClassSpec, action: ProjectiveSpaceAction) -> EquivariantClass:
    if spec.hypersurfaces is not None:
        return hypersurface_class(
            action, [(h.degree, _character(h.chi, action.rank)) for h in spec.hypersurfaces]
        )
    poly = action.ring.zero
    for term in spec.terms or ():
        powers = term.t_powers or [0] * action.rank
        if len(powers) != action.rank:
            raise VariableSetMismatch(f"term exponents {powers} do not match torus rank {action.rank}")
        poly += action.ring({(term.h_power, *powers): to_ground(Fraction(term.coefficient))})
    return EquivariantClass(poly, action)


def _build_polynomial(scenario: Scenario) -> ChernPolynomial:
    monomials = [
        ChernMonomial(
            Fraction(m.coefficient),
            tuple(ChernFactor(f.bundle, f.index, f.power) for f in m.factors),
        )
        for m in scenario.polynomial
    ]
    return ChernPolynomial.of(*monomials)


def _evaluation_points(scenario: Scenario, main: BuiltSpace) -> List[str]:
    if scenario.mode.kind == "singular":
        return list(scenario.mode.on_x)
    return main.space.ids


def build_scenario(scenario: Scenario) -> BuiltScenario:
    """Turn a parsed scenario into engine objects; raises engine errors on semantic problems."""
    rank = scenario.torus_rank
    mode = scenario.mode
    built = BuiltScenario(scenario)
    if mode.kind == "schubert":
        if mode.n != rank:
            raise VariableSetMismatch(f"Schubert runs on Fl_{mode.n} need torus rank {mode.n}")
        return built

    built.main = _build_space(scenario.space, rank)
    points = _evaluation_points(scenario, built.main)
    for point_id in points:
        built.main.space.point(point_id)

    for name, spec in scenario.bundles.items():
        if isinstance(spec, PullbackBundleSpec):
            if spec.source_space not in scenario.spaces:
                raise UnmappedPoint(
                    f"bundle {name!r} refers to unknown space {spec.source_space!r}", bundle=name
                )
            target = _build_space(scenario.spaces[spec.source_space], rank)
            for source in spec.point_map:
                built.main.space.point(source)
            bundle = pullback_bundle(spec.point_map, _build_bundle(spec.bundle, target, rank), points)
        else:
            bundle = _build_bundle(spec, built.main, rank)
        built.bundles[name] = bundle

    built.poly = _build_polynomial(scenario)
    for name in built.poly.bundles:
        if name not in built.bundles:
            raise UndefinedBundle(f"polynomial uses undefined bundle {name!r}", bundle=name)
        missing = [p for p in points if p not in built.bundles[name].fibers]
        if missing:
            raise UnmappedPoint(f"bundle {name!r} is undefined at {missing}", bundle=name)
    for monomial in built.poly.monomials:
        for factor in monomial.factors:
            bundle_rank = built.bundles[factor.bundle].rank
            if factor.index > bundle_rank:
                raise IndexOutOfRange(
                    f"c_{factor.index} of {factor.bundle!r} exceeds its rank {bundle_rank}",
                    bundle=factor.bundle,
                )

    if mode.kind == "smooth" and built.poly.degree != built.main.space.dim:
        raise DegreeMismatch(
            f"polynomial has weighted degree {built.poly.degree}, "
            f"space has dimension {built.main.space.dim}"
        )
    if mode.kind in ("singular", "localize", "degree"):
        if built.main.action is None:
            raise VariableSetMismatch(f"mode {mode.kind!r} needs a projective space")
        built.cls = _build_class(mode.class_spec, built.main.action)
    if mode.kind == "singular":
        if built.poly.degree != mode.dim_x:
            raise DegreeMismatch(
                f"polynomial has weighted degree {built.poly.degree}, dim_x is {mode.dim_x}"
            )
        codim = built.main.action.n - mode.dim_x
        if not is_homogeneous(built.cls.poly, codim):
            raise DegreeMismatch(f"class has degree {built.cls.degree}, expected {codim}")
    return built


# ========== PARSING ==========
def parse_scenario(text: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioParseError(
            f"line {e.lineno}, column {e.colno}: {e.msg}", line=e.lineno, column=e.colno
        ) from None
    try:
        scenario = Scenario.model_validate(data)
    except ValidationError as e:
        raise ScenarioParseError(format_validation_error(e)) from None
    try:
        build_scenario(scenario)
    except EquilocError as e:
        raise ScenarioValidationError.wrap(e) from e
    except ValueError as e:
        raise ScenarioValidationError(str(e)) from e
    return scenario


def dump_scenario(scenario: Scenario) -> str:
    return scenario.model_dump_json(by_alias=True, indent=2)


# ========== RUNNING ==========
def _records(validations: Sequence[Validation]) -> List[ValidationRecord]:
    return [ValidationRecord(name=v.name, passed=v.passed, detail=v.detail) for v in validations]


def _residue_report(scenario: Scenario, report: ResidueReport) -> RunReport:
    return RunReport(
        scenario=scenario.name,
        mode=scenario.mode.kind,
        result=str(report.value),
        entries={point_id: str(beta) for point_id, beta in report.contributions.items()},
        validations=_records(report.validations),
    )


def run_scenario(scenario: Scenario, settings: Optional[EngineSettings] = None) -> RunReport:
    """Run a parsed scenario; engine errors from the computation propagate unchanged."""
    settings = settings or DEFAULT_SETTINGS
    try:
        built = build_scenario(scenario)
    except EquilocError as e:
        raise ScenarioValidationError.wrap(e) from e
    service = LocalizationService(settings)
    mode = scenario.mode
    logger.info("running scenario %s (%s)", scenario.name, mode.kind)

    if mode.kind == "smooth":
        report = service.bott_residue_report(built.main.space, built.bundles, built.poly)
        return _residue_report(scenario, report)

    if mode.kind == "singular":
        report = service.singular_report(
            built.main.action, built.cls, mode.on_x, built.bundles, built.poly, mode.dim_x
        )
        return _residue_report(scenario, report)

    if mode.kind == "degree":
        value = service.equivariant_degree(built.main.action, built.cls)
        return RunReport(
            scenario=scenario.name,
            mode=mode.kind,
            result=str(value),
            validations=[
                ValidationRecord(
                    name="degree", passed=True, detail=f"homogeneous of degree {built.main.action.n}"
                )
            ],
        )

    if mode.kind == "localize":
        table = service.localize_class(built.main.action, built.cls)
        verification = service.verify_localization(built.main.action, built.cls, table)
        if not verification:
            raise ReconstructionFailed(
                "localization table does not reconstruct the class",
                residual=verification.residual,
            )
        return RunReport(
            scenario=scenario.name,
            mode=mode.kind,
            entries=table.as_strings(),
            validations=_records([Validation("reconstruction", True, "exact after clearing denominators")]),
        )

    convention = calibrated_convention(tuple(settings.calibration_ranks))
    v = Permutation.from_id(mode.v)
    table = schubert_localize(mode.n, v, convention)
    restrictions = flag_restriction_table(mode.n, double_schubert(mode.n, v, convention), convention)
    outside = [
        u for u, value in restrictions.items() if value and not bruhat_leq(Permutation.from_id(u), v)
    ]
    return RunReport(
        scenario=scenario.name,
        mode=mode.kind,
        entries=table.as_strings(),
        validations=_records(
            [
                Validation("calibration", True, str(convention)),
                Validation("support", not outside, f"entries vanish off the Bruhat interval below {v}"),
            ]
        ),
    )


def render_text(report: RunReport) -> str:
    lines = [f"scenario: {report.scenario} ({report.mode})"]
    if report.result is not None:
        lines.append(f"result: {report.result}")
    if report.entries:
        lines.append("contributions:" if report.result is not None else "table:")
        lines.extend(f"  {point_id}: {value}" for point_id, value in report.entries.items())
    lines.append("validations:")
    for record in report.validations:
        mark = "ok" if record.passed else "FAILED"
        lines.append(f"  [{mark}] {record.name}: {record.detail}")
    return "\n".join(lines)


def render_json(report: RunReport) -> str:
    return report.model_dump_json(indent=2)
