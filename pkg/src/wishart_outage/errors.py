"""Exception types raised across the package."""


class WishartOutageError(Exception):
    """Base class for every error raised by this package."""


class DomainError(WishartOutageError, ValueError):
    """An argument lies outside the region where an operation is defined."""


class RankError(WishartOutageError, ValueError):
    """A mean matrix expected to be rank one is not (numerically)."""


class NonConvergence(WishartOutageError, ArithmeticError):
    """A series exhausted its term budget before meeting its tolerance."""


class BudgetExceeded(WishartOutageError, ArithmeticError):
    """A quadrature hit its evaluation budget before meeting its tolerance."""


class ParseError(WishartOutageError, ValueError):
    """A configuration document could not be parsed."""


class ValidationError(WishartOutageError, ValueError):
    """A configuration document parsed but violates an invariant."""


class SelfCheckFailed(WishartOutageError, ArithmeticError):
    """Two independent computations of the same quantity disagree."""
