"""Exception hierarchy shared by the numerical modules and the CLI."""


class ABCGreenError(Exception):
    """Base class for every error raised by the package."""


class DomainError(ABCGreenError, ValueError):
    """An argument lies outside the domain where a routine is defined."""


class PoleError(DomainError):
    """Evaluation requested at (or too close to) a pole of a Gamma prefactor.

    ``n_r`` names the radial quantum number of the offending pole, and
    ``channel`` the ``(q, k)`` pair when known.
    """

    def __init__(self, message, n_r=None, channel=None):
        super().__init__(message)
        self.n_r = n_r
        self.channel = channel


class QuadratureError(ABCGreenError, ArithmeticError):
    """The integrand produced NaN; the result cannot be trusted at all."""


class NotConvergedError(ABCGreenError, ArithmeticError):
    """A refinement or truncation loop ran out of budget before converging."""
