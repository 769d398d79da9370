"""Orthogonal polynomials on discrete measures and ratio asymptotics experiments."""

from .errors import (DegenerateMeasure, ExactnessWarning, IndexOutOfRange, InadmissibleDegree,
                     InvalidVerblunsky, NearZeroDenominator, NotCircleMeasure, NotRealMeasure,
                     OnSlit, OpxError, ZInsideHull)
from .measure import Measure, Polynomial, SupportDescriptor
from .opoly import BasisExpansion, OrthoBasis, VerblunskySeq, orthonormalize, verblunsky_to_basis

__version__ = "0.1.0"

__all__ = [
    "BasisExpansion", "DegenerateMeasure", "ExactnessWarning", "IndexOutOfRange",
    "InadmissibleDegree", "InvalidVerblunsky", "Measure", "NearZeroDenominator",
    "NotCircleMeasure", "NotRealMeasure", "OnSlit", "OpxError", "OrthoBasis", "Polynomial",
    "SupportDescriptor", "VerblunskySeq", "ZInsideHull", "orthonormalize", "verblunsky_to_basis",
]
