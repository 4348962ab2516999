"""Kernel density and level-set estimation on embedded manifolds."""

from .geometry import DomainError, EvaluationGrid, Kind, ManifoldSpec, make_grid
from .density import DensityField, evaluate_field
from .setops import FinitePointSet, GridSubset

__all__ = [
    "DensityField",
    "DomainError",
    "EvaluationGrid",
    "FinitePointSet",
    "GridSubset",
    "Kind",
    "ManifoldSpec",
    "evaluate_field",
    "make_grid",
]

__version__ = "0.1.0"
