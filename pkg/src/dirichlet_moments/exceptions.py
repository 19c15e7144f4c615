"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the documented domain of an operation."""


class PoleError(ArithmeticError):
    """Evaluation requested at (or numerically too close to) a pole."""


class NumericalError(ArithmeticError):
    """A numerical self-check failed (non-real result, tail not certified, ...)."""
