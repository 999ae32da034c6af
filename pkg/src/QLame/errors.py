class QLameError(Exception):
    """Base class of every error raised by QLame."""


class DomainError(QLameError, ValueError):
    """Input outside the domain of a function (e.g. Im(tau) <= 0)."""


class ConfigError(QLameError, ValueError):
    """Invalid run configuration or unparsable config file."""


class ComplexShiftError(QLameError, ValueError):
    """Degree or length requested for an operator with non-real shifts."""


class DegenerateParameterError(QLameError, ValueError):
    """A family label hits a zero of an elliptic number it is divided by."""


class NumericalError(QLameError, ArithmeticError):
    """Base class of numerical failures (exit code 3 in the CLI)."""


class SeriesNonConvergenceError(NumericalError):
    pass


class PoleProximityError(NumericalError):
    pass


class InsufficientSamplesError(NumericalError):
    pass


class RankDeficiencyError(NumericalError):
    pass


class ContinuationStallError(NumericalError):
    """Raised when path following cannot advance.

    The last accepted point is kept on the exception so callers can report
    where the continuation stopped.
    """

    def __init__(self, message: str, last_point=None):
        super().__init__(message)
        self.last_point = last_point
