"""Numerical toolkit for L*-algebras, orthogonal symmetric pairs and their curvature."""

from lstar.core import LStarAlgebra, verify_lstar_axiom, decompose_ideals
from lstar.errors import LStarError

__all__ = ["LStarAlgebra", "verify_lstar_axiom", "decompose_ideals", "LStarError"]
