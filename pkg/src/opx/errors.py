"""Exception taxonomy shared by every module.

The CLI maps each class name to a one-line diagnostic, so keep the names
stable.
"""


class OpxError(Exception):
    """Base class for all library errors."""


class DegenerateMeasure(OpxError):
    """The measure cannot support orthonormal polynomials of the requested degree."""


class InvalidVerblunsky(OpxError, ValueError):
    pass


class IndexOutOfRange(OpxError, IndexError):
    pass


class ZInsideHull(OpxError):
    """Evaluation point lies on or inside the convex hull of the support."""


class NearZeroDenominator(OpxError):
    """Cauchy denominator fell below a tenth of the analytic lower bound."""


class NotRealMeasure(OpxError):
    pass


class NotCircleMeasure(OpxError):
    pass


class OnSlit(OpxError):
    pass


class InadmissibleDegree(OpxError, ValueError):
    pass


class ExactnessWarning(UserWarning):
    """Requested degree exceeds the quadrature's exactness degree."""
