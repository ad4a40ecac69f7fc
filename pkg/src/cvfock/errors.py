"""Exception hierarchy shared by every module."""


class CvFockError(Exception):
    """Base class for library errors."""


class SchemaError(CvFockError, ValueError):
    """Malformed input: bad shapes, bad parameters, invalid files."""


class ModeError(SchemaError):
    """Mode index out of range or repeated."""


class CutoffInsufficient(CvFockError):
    """A constructor or channel would leave too much weight above the cutoff."""

    def __init__(self, message: str, leakage: float | None = None):
        super().__init__(message)
        self.leakage = leakage


class ZeroWeightError(CvFockError):
    """An operator annihilated the state (nothing left to normalize)."""


class ImprobableEvent(CvFockError):
    """A heralding event has probability below the configured floor."""

    def __init__(self, message: str, probability: float | None = None):
        super().__init__(message)
        self.probability = probability


class UndefinedQuantity(CvFockError):
    """Quantity not defined for this state (e.g. Fano factor of vacuum)."""


class ModelMismatch(CvFockError):
    """Data cannot be described by the assumed parametric model."""


class IllConditioned(CvFockError):
    """A linear inversion is too badly conditioned to trust."""

    def __init__(self, message: str, condition_number: float | None = None):
        super().__init__(message)
        self.condition_number = condition_number


class ConvergenceFailure(CvFockError):
    """An iterative solver stopped without meeting its criterion."""


NUMERICAL_ERRORS = (
    CutoffInsufficient,
    ZeroWeightError,
    ImprobableEvent,
    UndefinedQuantity,
    ModelMismatch,
    IllConditioned,
    ConvergenceFailure,
)
