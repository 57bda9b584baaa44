"""Exception types shared across the package."""


class IfsdistError(Exception):
    """Base class for all package-specific errors."""


class DegenerateSampleError(IfsdistError):
    """Sample carries no usable spread (all values identical, zero variance)."""


class NoDataError(IfsdistError):
    """An operation left no observations to work with."""


class NumericalFailureError(IfsdistError):
    """A numerical routine produced non-finite values."""


class NonConvergenceError(IfsdistError):
    """An iterative solver exhausted its budget without meeting tolerance.

    Carries the last solver report in ``report`` when available.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ModelFormatError(IfsdistError):
    """A serialized model file does not match the expected schema."""


class BenchmarkError(IfsdistError):
    """Too many replications failed for the benchmark to be trustworthy."""
