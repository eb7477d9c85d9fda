"""polymod: modular reduction of string Coxeter groups into finite polytope groups."""

from .errors import PolymodError, BudgetExceeded
from .rings import QuadInt, GaussInt, RingSpec, IdealSpec, TAU, SQRT5
from .coxeter import Diagram, parse_symbol
from .groupkit import MatrixGroup, closure
from .cgroup import PolytopeReport, reduce_and_report, hemi_quotient_pipeline
from .mobius import build_mobius_polytope

__all__ = [
    "PolymodError", "BudgetExceeded",
    "QuadInt", "GaussInt", "RingSpec", "IdealSpec", "TAU", "SQRT5",
    "Diagram", "parse_symbol",
    "MatrixGroup", "closure",
    "PolytopeReport", "reduce_and_report", "hemi_quotient_pipeline",
    "build_mobius_polytope",
]

__version__ = "0.1.0"
