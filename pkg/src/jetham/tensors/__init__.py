"""Torsion and curvature d-tensor tables with definition-based oracles."""

from .oracle import (
    connection_array,
    curvature_oracle,
    frame_commutators,
    oracle_tables,
    torsion_oracle,
)
from .tables import (
    CURVATURE_FAMILIES,
    CURVATURE_KINDS,
    STRUCTURAL_ZEROS,
    TORSION_FAMILIES,
    TORSION_KINDS,
    CurvatureTable,
    TorsionTable,
    both_tables,
    curvature_table,
    torsion_table,
)

__all__ = [
    "CURVATURE_FAMILIES",
    "CURVATURE_KINDS",
    "STRUCTURAL_ZEROS",
    "TORSION_FAMILIES",
    "TORSION_KINDS",
    "CurvatureTable",
    "TorsionTable",
    "both_tables",
    "connection_array",
    "curvature_oracle",
    "curvature_table",
    "frame_commutators",
    "oracle_tables",
    "torsion_oracle",
    "torsion_table",
]
