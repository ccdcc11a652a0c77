"""Exception hierarchy shared by every module."""


class DirentropyError(Exception):
    """Base class for all package errors."""


class HorizonExceeded(DirentropyError, ValueError):
    pass


class InvalidPhase(DirentropyError, ValueError):
    pass


class CoverInfeasible(DirentropyError, ValueError):
    pass


class OutOfWindow(DirentropyError, IndexError):
    pass


class UnsupportedShape(DirentropyError, ValueError):
    pass


class MarginTooSmall(DirentropyError, ValueError):
    pass


class UnsupportedExact(DirentropyError, NotImplementedError):
    pass


class InsufficientData(DirentropyError, ValueError):
    pass


class DeclarationMissing(DirentropyError, ValueError):
    pass


class InvariantViolation(DirentropyError, AssertionError):
    """An identity that must hold exactly was found to fail."""
