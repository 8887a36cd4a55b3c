"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class PrecisionError(ArithmeticError):
    """A numerical approximation cannot meet its stated accuracy."""
