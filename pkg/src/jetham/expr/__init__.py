"""Expression language and forward-mode differentiation engine."""

from .dual import MAX_UNITS, Dual3
from .field import (
    FieldArray,
    ScalarField,
    as_flat,
    coordinate_name,
    evaluate,
    gradient,
    n_coords,
    parse,
    partial,
    pretty,
)
from .parser import parse_coordinate

__all__ = [
    "MAX_UNITS",
    "Dual3",
    "FieldArray",
    "ScalarField",
    "as_flat",
    "coordinate_name",
    "evaluate",
    "gradient",
    "n_coords",
    "parse",
    "parse_coordinate",
    "partial",
    "pretty",
]
