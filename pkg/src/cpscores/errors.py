"""Exception hierarchy.

Validation errors mean the inputs are malformed or violate a model
constraint; numerical errors mean a matrix turned out singular, indefinite
or otherwise unusable for the requested computation.
"""


class FactorScoreError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(FactorScoreError, ValueError):
    pass


class NumericalError(FactorScoreError, ArithmeticError):
    pass


class DimensionMismatch(ValidationError):
    pass


class HeywoodCase(ValidationError):
    """A communality reached or exceeded one (non-positive unique variance)."""


class NonPositiveDiagonal(ValidationError):
    pass


class TooFewRows(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class EmptyGroup(ValidationError):
    pass


class MatrixParseError(ValidationError):
    pass


class NotPSD(NumericalError):
    pass


class NotPD(NumericalError):
    pass


class DegenerateWeights(NumericalError):
    """A predictor has (numerically) zero variance."""


class RankDeficient(NumericalError):
    pass
