"""
Error kinds raised by the stability lab.

Every error carries a short ``code`` (the kind name reported by the CLI, the
API and sweep rows) and the process ``exit_code`` used by the CLI.
"""


class LabError(Exception):
    default_detail = "A stability lab error occurred."
    default_code = "error"
    exit_code = 3

    def __init__(self, detail=None, code=None):
        self.detail = detail if detail is not None else self.default_detail
        self.code = code if code is not None else self.default_code
        self.stage = None
        super().__init__(self.detail)

    def __str__(self) -> str:
        if self.stage:
            return f"[{self.stage}] {self.code}: {self.detail}"
        return f"{self.code}: {self.detail}"


class DimensionMismatch(LabError):
    default_detail = "Vector length does not match the space dimension."
    default_code = "dimension"


class InvalidArity(LabError):
    default_detail = "Sample arity must be 1 or 3."
    default_code = "arity"


class DegenerateParameter(LabError):
    default_detail = "alpha must be nonzero, and beta must be nonzero for family B."
    default_code = "degenerate-parameter"
    exit_code = 2


class FamilyMismatch(LabError):
    default_detail = "Parameters belong to another inequality family."
    default_code = "family"


class EmptySample(LabError):
    default_detail = "The sample plan produced no points."
    default_code = "empty-sample"


class ScaleOverflow(LabError):
    default_detail = "The orbit scale leaves the double precision range."
    default_code = "scale-overflow"


class NumericFailure(LabError):
    default_detail = "A non-finite value appeared during evaluation."
    default_code = "numeric"


class NotConverged(LabError):
    default_detail = "The iteration did not converge."
    default_code = "not-converged"
    exit_code = 2


class DivergentSeries(LabError):
    default_detail = "The control series diverges."
    default_code = "divergent"
    exit_code = 2


class Inadmissible(LabError):
    default_detail = "The inequality parameters are not admissible."
    default_code = "inadmissible"
    exit_code = 2


class OutOfRegime(LabError):
    default_detail = "The closed-form constant has a nonpositive denominator."
    default_code = "out-of-regime"
    exit_code = 2


class DegenerateScale(LabError):
    default_detail = "Scheme scale must satisfy |scale| != 1 and scale != 0."
    default_code = "degenerate-scale"
    exit_code = 2


class SingularPoint(LabError):
    default_detail = "Zero norm raised to a negative power."
    default_code = "singular-point"


class ControlKindError(LabError):
    default_detail = "The operation does not support this control kind."
    default_code = "control"


class ReportIOError(LabError):
    default_detail = "The report could not be written."
    default_code = "io"
