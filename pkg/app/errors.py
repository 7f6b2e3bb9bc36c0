from typing import Any, Dict


class EquilocError(Exception):
    """
    Base error for the localization engine.
    Carries a machine-readable code, the CLI exit code and a detail dict
    shaped like the rest of the API's error payloads.
    """

    error_code = "ENGINE_ERROR"
    exit_code = 3

    def __init__(self, message: str, **context: Any) -> None:
        super().__init__(message)
        self.message = message
        self.context = context

    @property
    def detail(self) -> Dict[str, Any]:
        return {
            "success": False,
            "message": self.message,
            "error": self.error_code,
            **{key: str(value) for key, value in self.context.items()},
        }


# ========== EXACT ARITHMETIC ==========
class VariableSetMismatch(EquilocError):
    error_code = "VARIABLE_SET_MISMATCH"


class Indivisible(EquilocError):
    error_code = "INDIVISIBLE"


class IndexOutOfRange(EquilocError):
    error_code = "INDEX_OUT_OF_RANGE"


class NotConstant(EquilocError):
    error_code = "NOT_CONSTANT"


class DegreeMismatch(EquilocError):
    error_code = "DEGREE_MISMATCH"


class DenominatorVanishes(EquilocError):
    error_code = "DENOMINATOR_VANISHES"


# ========== GEOMETRY ==========
class RepeatedWeights(EquilocError):
    error_code = "REPEATED_WEIGHTS"


class UnknownPoint(EquilocError):
    error_code = "UNKNOWN_POINT"


class NormalWeightAbsent(EquilocError):
    error_code = "NORMAL_WEIGHT_ABSENT"


class ZeroNormalWeight(EquilocError):
    error_code = "ZERO_NORMAL_WEIGHT"


class UnmappedPoint(EquilocError):
    error_code = "UNMAPPED_POINT"


class UndefinedBundle(EquilocError):
    error_code = "UNDEFINED_BUNDLE"


# ========== LOCALIZATION ==========
class VanishingCheckFailed(EquilocError):
    error_code = "VANISHING_CHECK_FAILED"


class NonFactorablePivot(EquilocError):
    error_code = "NON_FACTORABLE_PIVOT"


class NonTriangularBasis(EquilocError):
    error_code = "NON_TRIANGULAR_BASIS"


class InconsistentExpansion(EquilocError):
    error_code = "INCONSISTENT"


class ReconstructionFailed(EquilocError):
    error_code = "RECONSTRUCTION_FAILED"


class CalibrationFailed(EquilocError):
    error_code = "CALIBRATION_FAILED"


class SubstitutionMismatch(EquilocError):
    error_code = "SUBSTITUTION_MISMATCH"


# ========== SCENARIOS ==========
class ScenarioParseError(EquilocError):
    error_code = "PARSE_ERROR"
    exit_code = 2


class ScenarioValidationError(EquilocError):
    """Semantic problem in a well-formed scenario; keeps the code of the engine error behind it."""

    error_code = "VALIDATION_ERROR"
    exit_code = 1

    @classmethod
    def wrap(cls, error: EquilocError) -> "ScenarioValidationError":
        wrapped = cls(error.message, **error.context)
        wrapped.error_code = error.error_code
        return wrapped
