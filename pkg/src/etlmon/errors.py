"""Exception hierarchy for the etlmon package.

Errors are grouped by the layer that raises them so the CLI can map them
to stable exit codes (spec/parse problems vs. data/calibration problems).
"""


class EtlError(Exception):
    """Base class for all etlmon errors."""


# --- embedding / predicate layer ---------------------------------------


class DimensionMismatch(EtlError):
    pass


class ZeroVector(EtlError):
    """Cosine distance is undefined for zero-norm vectors."""


class EmptyTargetSet(EtlError):
    pass


# --- specification language ---------------------------------------------


class SpecSyntaxError(EtlError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class UnknownPredicate(EtlError):
    pass


class UnknownTargetAlias(EtlError):
    pass


class DuplicateName(EtlError):
    pass


class NegativeEpsilon(EtlError):
    pass


# --- semantics / monitoring ----------------------------------------------


class IndexOutOfRange(EtlError):
    pass


class UnknownProposition(EtlError):
    pass


class LengthMismatch(EtlError):
    pass


# --- calibration -----------------------------------------------------------


class EmptyCalibrationSet(EtlError):
    pass


class NoPositives(EtlError):
    pass


class NoPositiveTimestep(EtlError):
    pass


class InvalidAlpha(EtlError):
    pass


class EmptyScores(EtlError):
    pass


class UnsupportedComparison(EtlError):
    """Thresholds are calibrated for <=/< predicates only."""


# --- simulator / dataset ----------------------------------------------------


class ControlOutOfRange(EtlError):
    pass


class InsufficientSplit(EtlError):
    pass


class InvalidConfig(EtlError):
    pass


SPEC_ERRORS = (
    SpecSyntaxError,
    UnknownPredicate,
    UnknownTargetAlias,
    DuplicateName,
    NegativeEpsilon,
    InvalidConfig,
)

DATA_ERRORS = (
    DimensionMismatch,
    ZeroVector,
    EmptyTargetSet,
    IndexOutOfRange,
    UnknownProposition,
    LengthMismatch,
    EmptyCalibrationSet,
    NoPositives,
    NoPositiveTimestep,
    InvalidAlpha,
    EmptyScores,
    UnsupportedComparison,
    ControlOutOfRange,
    InsufficientSplit,
)
