"""Exception hierarchy shared across the package.

CLI exit codes: ValidationError (and subclasses) -> 2, ConvergenceError -> 3,
OS/IO errors -> 4.
"""


class SfdaError(Exception):
    """Base class for all library errors."""


class ValidationError(SfdaError):
    """Invalid input data, labels, shapes, or parameter values."""


class DivisorError(ValidationError):
    """Too few observations for the pooled-covariance divisor (n <= K)."""


class DegenerateProblemError(ValidationError):
    """Structurally degenerate optimization problem.

    Raised when the linear objective vanishes on the feasible subspace, the
    objective matrix annihilates the initial vector, a constraint stack is
    rank deficient, or a gram matrix is numerically singular.  Instances may
    carry context attributes such as ``class_index``, ``component_index`` or
    ``condition``.
    """

    def __init__(self, message, **context):
        super().__init__(message)
        for key, value in context.items():
            setattr(self, key, value)


class ConvergenceError(SfdaError):
    """Iteration cap reached before meeting the requested tolerance.

    Carries ``residual`` (last inner residual) and, for the outer loop,
    ``last_alpha`` / ``last_value`` so callers can inspect the final iterate.
    """

    def __init__(self, message, residual=None, last_alpha=None, last_value=None):
        super().__init__(message)
        self.residual = residual
        self.last_alpha = last_alpha
        self.last_value = last_value
