"""Filtered foliations, osculating groups and principal symbols of polynomial vector-field systems."""

from . import bchflow, catalog, filtration, hncone, osculating, polyfield, rockland, symbols
from .filtration import WeightedGenerators, check_hormander, fiber_dims, generate_filtration
from .osculating import GradedLieAlgebra, bch, coadjoint, dilate, free_nilpotent, osculating_at
from .polyfield import MultiPoly, PolyVectorField, bracket, parse_field, parse_poly

__version__ = "0.1.0"

__all__ = [
    "GradedLieAlgebra",
    "MultiPoly",
    "PolyVectorField",
    "WeightedGenerators",
    "__version__",
    "bch",
    "bchflow",
    "bracket",
    "catalog",
    "check_hormander",
    "coadjoint",
    "dilate",
    "fiber_dims",
    "filtration",
    "free_nilpotent",
    "generate_filtration",
    "hncone",
    "osculating",
    "osculating_at",
    "parse_field",
    "parse_poly",
    "polyfield",
    "rockland",
    "symbols",
]
