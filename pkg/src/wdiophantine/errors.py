"""Exception hierarchy shared by all modules."""


class WDAError(Exception):
    """Base class for library errors."""


class DimensionMismatch(WDAError, ValueError):
    pass


class PrecisionLimited(WDAError):
    """A comparison could not be decided at the working precision."""


class NoSolutionFound(WDAError):
    """Raised by the Dirichlet search only when undecidable candidates blocked it."""


class ScaleOverflow(WDAError):
    """The requested time or denominator exceeds the enumeration budget."""


class TerminatedRational(WDAError):
    """The approximation error reached exactly zero (rational direction).

    The partially assembled estimate record is kept on ``record``.
    """

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class InsufficientData(WDAError):
    pass


class DomainError(WDAError, ValueError):
    pass


class DecompositionError(WDAError):
    pass


class IntegralityViolation(WDAError):
    """An identity that must hold over the integers failed (implementation bug signal)."""


class ContainmentViolation(WDAError, ValueError):
    pass


class InputError(WDAError, ValueError):
    """Malformed user input; carries an optional column position."""

    def __init__(self, message, text=None, column=None):
        self.base_message = message
        if text is not None and column is not None:
            message = f"{message} (column {column + 1}): {text!r}"
        super().__init__(message)
        self.text = text
        self.column = column
