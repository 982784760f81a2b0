"""Stability and hyperstability of matrix polynomials over planar regions."""

from .config import AnalysisConfig, Budget, Tolerances
from .matpoly import MatrixPolynomial, eigenvalues
from .regions import Region
from .scalarpoly import ComplexPolynomial, roots
from .stability import check_hyperstable, check_stable
from .verdicts import HyperVerdict

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig", "Budget", "ComplexPolynomial", "HyperVerdict", "MatrixPolynomial", "Region",
    "Tolerances", "check_hyperstable", "check_stable", "eigenvalues", "roots",
]
