"""Exception types raised across the package.

Every error is a ``ValueError`` subclass so callers that only care about
"bad input" can catch one thing.
"""


class SLKError(ValueError):
    """Base class for all input/contract errors in this package."""


class InvalidDimension(SLKError):
    pass


class DimensionMismatch(SLKError):
    pass


class NegativeCoefficient(SLKError):
    pass


class ComplexCoefficient(SLKError):
    pass


class ZeroVector(SLKError):
    pass


class NotNormalized(SLKError):
    pass


class LabelOutOfRange(SLKError):
    pass


class InvalidTable(SLKError):
    pass


class NonHermitianSpectrum(SLKError):
    pass


class ParameterOutOfRange(SLKError):
    pass


class PoleProximity(SLKError):
    pass


class EmptyBlock(SLKError):
    pass


class BudgetTooSmall(SLKError):
    pass


def check_dimension(d) -> int:
    if isinstance(d, bool) or int(d) != d or d < 2:
        raise InvalidDimension(f"dimension must be an integer >= 2, got {d!r}")
    return int(d)
