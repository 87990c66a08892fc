"""The catalog of outer functions g with closed-form first- and second-order
objects: values, subdifferentials, subderivatives, second subderivatives,
parabolic subderivatives, second-order tangent membership, and critical cones."""

from .base import OuterFunction
from .indicators import (
    NegSemidefIndicator,
    PolyhedralIndicator,
    nonpositive_orthant,
    second_order_tangent_cone,
    zero_set,
)
from .plq import PlqFunction, PlqPiece, absolute_value
from .reprs import (
    CriticalConeRepr,
    PointRep,
    PolyhedralConeRepr,
    PolyhedronRep,
    PredicateConeRepr,
    SpectralRep,
    SubdiffRepr,
)
from .smooth import SmoothQuadratic, zero_function
from .spectral import AlphaEigFunction, MaxEigFunction, SumTopEigFunction, clustered_eig

__all__ = [
    "OuterFunction",
    "PolyhedralIndicator",
    "NegSemidefIndicator",
    "nonpositive_orthant",
    "zero_set",
    "second_order_tangent_cone",
    "PlqFunction",
    "PlqPiece",
    "absolute_value",
    "SmoothQuadratic",
    "zero_function",
    "AlphaEigFunction",
    "MaxEigFunction",
    "SumTopEigFunction",
    "clustered_eig",
    "SubdiffRepr",
    "PolyhedronRep",
    "SpectralRep",
    "PointRep",
    "CriticalConeRepr",
    "PolyhedralConeRepr",
    "PredicateConeRepr",
]
