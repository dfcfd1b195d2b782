"""Exception hierarchy for cframe."""


class CFrameError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(CFrameError, ValueError):
    """Operands live in different algebras, modules or measure spaces."""


class GridMismatchError(DimensionError):
    """Two discretized objects are sampled on different grids."""


class DomainError(CFrameError, ValueError):
    """An input violates an operation's precondition (e.g. non-Hermitian)."""


class ModeError(CFrameError, ValueError):
    """The requested scalar or integration mode is unavailable for the input."""


class ParameterError(CFrameError, ValueError):
    """A numeric parameter is out of its admissible range."""


class NumericError(CFrameError, ArithmeticError):
    """An iterative routine failed to converge."""


class SingularityError(CFrameError, ArithmeticError):
    """An element or operator is not invertible at the configured tolerance."""

    def __init__(self, message, smallest_singular_value=0.0):
        super().__init__(message)
        self.smallest_singular_value = smallest_singular_value


class NotAFrameError(SingularityError):
    """A frame was required but the lower frame bound vanishes."""


class ConfigError(CFrameError, ValueError):
    """A job configuration failed validation.

    ``path`` is a dotted JSON path to the offending field and ``line`` the
    1-based source line when it is known.
    """

    def __init__(self, message, path="", line=None):
        where = path or "<root>"
        if line is not None:
            where = f"line {line}: {where}"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line
