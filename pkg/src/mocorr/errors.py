"""Shared exception types.

Every error raised on purpose by this package derives from
:class:`MocorrError`, so callers can catch library failures without
swallowing genuine bugs.  Validation problems double as ``ValueError``
for ergonomic use with plain numpy code.
"""


class MocorrError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(MocorrError, ValueError):
    """An input violates a documented precondition or type invariant."""


class EvaluationError(MocorrError):
    """A numerical evaluation produced a non-finite value."""


class NonConvergenceError(MocorrError):
    """An iterative solver ran out of iterations.

    Carries the last iterate and the residual it achieved so callers can
    inspect how close the run got.
    """

    def __init__(self, message, iterate=None, residual=None, iterations=None):
        super().__init__(message)
        self.iterate = iterate
        self.residual = residual
        self.iterations = iterations


class DivergentMomentError(MocorrError):
    """An empirical or analytic moment check flags a divergent integral."""
