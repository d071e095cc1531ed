"""hasselab: desk-scale circle-method laboratory over number fields."""

from .field import AlgebraicNumber, FieldDescriptor, build_field

__version__ = "0.1.0"

__all__ = [
    "AlgebraicNumber",
    "FieldDescriptor",
    "build_field",
    "__version__",
]
