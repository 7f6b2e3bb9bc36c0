from fractions import Fraction
from typing import Annotated, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Vector = List[int]


class TangentBundleSpec(BaseModel):
    kind: Literal["tangent"] = "tangent"


class LineBundleSpec(BaseModel):
    """O(degree) twisted by chi, on a projective space."""
    kind: Literal["line"] = "line"
    degree: int
    chi: Vector


class FlagLineBundleSpec(BaseModel):
    kind: Literal["flag_line"] = "flag_line"
    lam: Vector


class ExplicitBundleSpec(BaseModel):
    kind: Literal["explicit"] = "explicit"
    fibers: Dict[str, List[Vector]]

    @field_validator("fibers")
    @classmethod
    def check_fibers(cls, fibers: Dict[str, List[Vector]]) -> Dict[str, List[Vector]]:
        if not fibers:
            raise ValueError("at least one fiber is required")
        if len({len(chars) for chars in fibers.values()}) != 1:
            raise ValueError("every fiber must list the same number of characters")
        return fibers


BaseBundleSpec = Annotated[
    Union[TangentBundleSpec, LineBundleSpec, FlagLineBundleSpec, ExplicitBundleSpec],
    Field(discriminator="kind"),
]


class PullbackBundleSpec(BaseModel):
    """f^*E: `bundle` lives on `source_space`, `point_map` sends this space's points there."""
    kind: Literal["pullback"] = "pullback"
    source_space: str
    point_map: Dict[str, str]
    bundle: BaseBundleSpec = Field(default_factory=TangentBundleSpec)


BundleSpec = Annotated[
    Union[
        TangentBundleSpec,
        LineBundleSpec,
        FlagLineBundleSpec,
        ExplicitBundleSpec,
        PullbackBundleSpec,
    ],
    Field(discriminator="kind"),
]


class ProjectiveSpaceSpec(BaseModel):
    kind: Literal["projective"] = "projective"
    weights: List[Vector] = Field(min_length=2)
    labels: Optional[List[str]] = None

    @model_validator(mode="after")
    def check_labels(self) -> "ProjectiveSpaceSpec":
        if self.labels is not None and len(self.labels) != len(self.weights):
            raise ValueError("labels must match weights one to one")
        return self


class FlagSpaceSpec(BaseModel):
    kind: Literal["flag"] = "flag"
    n: int = Field(ge=2, le=9)


SpaceSpec = Annotated[Union[ProjectiveSpaceSpec, FlagSpaceSpec], Field(discriminator="kind")]


def _check_rational(value: str) -> str:
    try:
        Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"{value!r} is not an exact rational like '3' or '-1/2'") from None
    return value


class ChernFactorSpec(BaseModel):
    bundle: str
    index: int = Field(ge=0)
    power: int = Field(default=1, ge=1)


class ChernMonomialSpec(BaseModel):
    coefficient: str = "1"
    factors: List[ChernFactorSpec] = []

    @field_validator("coefficient")
    @classmethod
    def check_coefficient(cls, value: str) -> str:
        return _check_rational(value)


class HypersurfaceSpec(BaseModel):
    degree: int
    chi: Vector


class ClassTermSpec(BaseModel):
    """coefficient * h^h_power * prod t_k^t_powers[k]."""
    coefficient: str = "1"
    h_power: int = Field(default=0, ge=0)
    t_powers: List[Annotated[int, Field(ge=0)]] = []

    @field_validator("coefficient")
    @classmethod
    def check_coefficient(cls, value: str) -> str:
        return _check_rational(value)


class ClassSpec(BaseModel):
    hypersurfaces: Optional[List[HypersurfaceSpec]] = None
    terms: Optional[List[ClassTermSpec]] = None

    @model_validator(mode="after")
    def check_one_form(self) -> "ClassSpec":
        if (self.hypersurfaces is None) == (self.terms is None):
            raise ValueError("give exactly one of 'hypersurfaces' or 'terms'")
        return self


class SmoothMode(BaseModel):
    kind: Literal["smooth"] = "smooth"


class SingularMode(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    kind: Literal["singular"] = "singular"
    class_spec: ClassSpec = Field(alias="class")
    on_x: List[str] = Field(min_length=1)
    dim_x: int = Field(ge=0)


class LocalizeMode(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    kind: Literal["localize"] = "localize"
    class_spec: ClassSpec = Field(alias="class")


class DegreeMode(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    kind: Literal["degree"] = "degree"
    class_spec: ClassSpec = Field(alias="class")


class SchubertMode(BaseModel):
    kind: Literal["schubert"] = "schubert"
    n: int = Field(ge=2, le=9)
    v: str

    @model_validator(mode="after")
    def check_permutation(self) -> "SchubertMode":
        if sorted(self.v) != [str(k) for k in range(1, self.n + 1)]:
            raise ValueError(f"v must be a permutation of 1..{self.n} in one-line notation")
        return self


ModeSpec = Annotated[
    Union[SmoothMode, SingularMode, LocalizeMode, DegreeMode, SchubertMode],
    Field(discriminator="kind"),
]


class Scenario(BaseModel):
    name: str = "scenario"
    torus_rank: int = Field(ge=1)
    space: Optional[SpaceSpec] = None
    spaces: Dict[str, SpaceSpec] = {}
    bundles: Dict[str, BundleSpec] = {}
    polynomial: List[ChernMonomialSpec] = []
    mode: ModeSpec = Field(default_factory=SmoothMode)

    @model_validator(mode="after")
    def check_space(self) -> "Scenario":
        if self.space is None and self.mode.kind != "schubert":
            raise ValueError(f"mode {self.mode.kind!r} needs a space")
        return self


# ========== REPORTS ==========
class ValidationRecord(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class RunReport(BaseModel):
    """
    Exact results only: every number is a fraction string.
    `result` is set for residue and degree runs; table runs report `entries`.
    """
    scenario: str
    mode: str
    result: Optional[str] = None
    entries: Dict[str, str] = {}
    validations: List[ValidationRecord] = []
    success: bool = True
