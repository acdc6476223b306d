"""Exception types shared across the package."""


class QpCascadeError(Exception):
    """Base class for numerical and structural failures."""


class SingularSystem(QpCascadeError):
    """Linear system is singular to working precision (condition estimate beyond 1/eps)."""


class NoConvergence(QpCascadeError):
    """Iteration budget exhausted; carries the last residual norm."""

    def __init__(self, message, residual_norm=None):
        super().__init__(message)
        self.residual_norm = residual_norm


class InsufficientData(QpCascadeError):
    """Too few data points for the requested operation."""


class MinimalPeriodViolation(QpCascadeError):
    """A candidate superstable orbit returned earlier than its nominal period."""


class ModeBudgetExceeded(QpCascadeError):
    """Fourier tail stayed fat after doubling modes up to the configured maximum."""


class StepUnderflow(QpCascadeError):
    """Continuation step bisected below the minimum step without convergence."""


class SideAmbiguity(QpCascadeError):
    """Both branch sides converged to the same solution at the first continuation step."""


class ZeroDenominator(QpCascadeError):
    """Consecutive values coincide where a ratio is required."""


class IndexMismatch(QpCascadeError):
    """Record sequences do not cover the index ranges needed to be combined."""


class LogSingularity(QpCascadeError):
    """A cocycle factor vanished where log|m| is required."""
