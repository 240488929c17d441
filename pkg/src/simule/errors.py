"""Exception hierarchy shared across the package.

The CLI maps each family to a process exit code, see :mod:`simule.cli`.
"""


class SimuleError(Exception):
    """Base class for every error raised by this package."""


class UsageError(SimuleError, ValueError):
    """Malformed arguments: dimension mismatches, invalid configuration."""


class DataError(SimuleError, ValueError):
    """Input data cannot support the requested computation."""


class NotPositiveDefinite(SimuleError, ArithmeticError):
    """A matrix that must be positive definite is not (numerically)."""


class SolverError(SimuleError, RuntimeError):
    """An iterative numerical routine failed to converge."""


class EstimationError(SimuleError, RuntimeError):
    """The joint estimator produced no usable columns."""


class EvaluationError(SimuleError, RuntimeError):
    """A benchmark sweep produced no usable points."""
