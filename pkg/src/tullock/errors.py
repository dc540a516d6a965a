"""Exception hierarchy shared by all modules.

The CLI maps :class:`ValidationError` to exit code 1 and
:class:`NumericalError` to exit code 2.
"""


class TullockError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(TullockError, ValueError):
    """Invalid problem instance, scenario file or argument."""


class DomainError(ValidationError):
    """A point was evaluated outside the support of a function."""


class NumericalError(TullockError, ArithmeticError):
    """A numerical kernel failed to reach its tolerance."""


class IntegrationError(NumericalError):
    """Adaptive quadrature ran out of subdivisions.

    Carries the best estimate reached and its error bound.
    """

    def __init__(self, message, estimate, error):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class RootBracketError(NumericalError):
    """The function has no sign change over the bracket."""


class ConvergenceError(NumericalError):
    """An iterative solver stopped before meeting its residual tolerance."""

    def __init__(self, message, x=None, residual=None):
        super().__init__(message)
        self.x = x
        self.residual = residual
