"""Exception types raised by the library."""


class InvalidArgumentError(ValueError):
    """An argument has the wrong shape, range or type."""


class NumericDegeneracyError(ArithmeticError):
    """A matrix lost positive-definiteness or a variance became non-positive."""
