"""Exception types shared across the package."""


class PreconditionError(ValueError):
    """An operation was called on data that violates its preconditions."""


class UndefinedMetricError(ValueError):
    """A metric has no defined value on the given data (empty denominator,
    degenerate variance, single-class input). Raised instead of returning
    NaN so callers must handle the condition explicitly."""


class RecordFormatError(ValueError):
    """A file could not be parsed or violates the format contract.

    ``line`` is the 1-based line number when the failure is tied to one.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class CalibrationWarning(UserWarning):
    """The calibrated threshold's achieved FPR is far from the target."""
