"""Exception types shared across the package.

The CLI maps these onto exit codes: numeric failures exit 2, I/O and
schema failures exit 3.
"""


class IonforgeError(Exception):
    """Base class for all package errors."""


class NumericError(IonforgeError):
    """A computation failed or its preconditions were violated."""


class ConvergenceError(NumericError):
    """An iterative solver hit its iteration cap; carries the residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ZigzagInstabilityError(NumericError):
    """The chain is not a stable linear crystal at this trap ratio."""


class InfeasibleTrapError(NumericError):
    """No axial frequency satisfies the requested mode band."""


class NormalizationError(NumericError):
    """Attempted to normalize an all-zero interaction graph."""


class DimensionMismatchError(NumericError):
    """Array shapes are inconsistent with the model dimensions."""


class TrainingDivergedError(NumericError):
    """The training cost became non-finite."""


class SchemaError(IonforgeError):
    """A file does not match the expected schema or magic."""
