"""Exception types raised across the package."""


class ElliptikaError(Exception):
    """Base class."""


class InvalidInputError(ElliptikaError, ValueError):
    pass


class DomainError(ElliptikaError, ValueError):
    pass


class NotSPDError(DomainError):
    pass


class OrientationError(DomainError):
    """det F <= 0."""


class DistortionUndefinedError(DomainError):
    """Distortion mode K3 has no value on pure dilations."""


class OverflowGuardError(ElliptikaError, ArithmeticError):
    pass


class NotStressFreeError(ElliptikaError, ValueError):
    pass


class IntervalError(DomainError):
    """Rank-one line leaves det > 0 inside the requested interval."""


class DegenerateDirectionError(ElliptikaError, ValueError):
    pass


class NumericalError(ElliptikaError, ArithmeticError):
    """Non-finite evaluation or step underflow."""
