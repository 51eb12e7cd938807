"""Numerical bounds on the elastic binodal of two-dimensional two-phase Hadamard materials."""
from .errors import BinodalError, DomainError
from .material import MaterialParams

__version__ = "0.1.0"

__all__ = ["BinodalError", "DomainError", "MaterialParams", "__version__"]
