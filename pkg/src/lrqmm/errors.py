"""Exception types raised across the package."""


class LrqmmError(Exception):
    """Base class for all package errors."""


class ParameterError(LrqmmError, ValueError):
    """Invalid parameter (distribution, rank, bit width, scale...)."""


class ShapeError(LrqmmError, ValueError):
    """Operands have incompatible shapes."""


class DegenerateInputError(LrqmmError, ValueError):
    """Input has no usable magnitude, e.g. an all-zero matrix."""


class RegimeError(LrqmmError, ValueError):
    """A bound was requested in a regime where it is undefined."""


class OverflowPreconditionError(LrqmmError, ArithmeticError):
    """Integer accumulation could overflow the wide accumulator."""
