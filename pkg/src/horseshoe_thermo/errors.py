"""Exception hierarchy shared by all modules.

Every error raised on purpose by the package derives from HorseshoeError, so
the CLI can tell numerical failures (exit 1) from configuration problems
(exit 3). Most classes also derive from the closest builtin so callers that
only know about ValueError or RuntimeError still catch them.
"""


class HorseshoeError(Exception):
    """Root of all package errors."""


class DomainError(HorseshoeError, ValueError):
    """A point lies outside the domain of the requested map or branch."""


class EscapeError(HorseshoeError):
    """An orbit left R0 ∪ R1 (or the planar rectangles) before the requested length.

    Attributes:
        index: Signed iterate index at which the orbit escaped.
    """

    def __init__(self, message: str, index: int) -> None:
        super().__init__(message)
        self.index = index


class RangeError(HorseshoeError, ValueError):
    """A numeric argument is outside its documented range."""


class PreconditionError(HorseshoeError, ValueError):
    """An operation's precondition does not hold for the given input."""


class AdmissibilityError(HorseshoeError, ValueError):
    """A word contains the forbidden factor "11" or is not a valid level word."""


class FormatError(HorseshoeError, ValueError):
    """A word does not have the shape an operation expects."""


class ResourceError(HorseshoeError):
    """A request exceeds a configured enumeration cap."""


class IncompleteError(HorseshoeError):
    """Decoding stopped because the tail has no further return.

    Attributes:
        decoded: Symbols decoded before the failure.
        suffix: The unconsumed part of the word.
    """

    def __init__(self, message: str, decoded: list, suffix: str) -> None:
        super().__init__(message)
        self.decoded = decoded
        self.suffix = suffix


class DegenerateError(HorseshoeError, ArithmeticError):
    """A normalizing quantity vanished."""


class ConvergenceError(HorseshoeError, RuntimeError):
    """An iterative solver did not reach its tolerance."""


class NotFoundError(HorseshoeError, LookupError):
    """A searched-for feature (such as a branch crossing) is absent."""


class KindError(HorseshoeError, TypeError):
    """An operation received a measure of the wrong kind."""


class InsufficientSignal(HorseshoeError):
    """Monte-Carlo estimates drowned in noise before a fit was possible."""


class ConfigError(HorseshoeError):
    """The run configuration could not be parsed or validated."""


class EmptyDataError(HorseshoeError, ValueError):
    """A table handed to the plotting layer has no rows."""


class ParameterWarning(UserWarning):
    """Parameters are valid but lead to a degenerate or capped computation."""
