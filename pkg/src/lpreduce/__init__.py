"""Exact desk-scale toolkit for dimension-preserving reductions between
shortest and closest vector problems in different l_p norms."""

from .core import (
    BallSpec,
    Basis,
    CvpInstance,
    LatticeVector,
    PNorm,
    count_points,
    count_primitive,
    enumerate_points,
    left_inverse,
    lp_norm,
    primitive_part,
    project_orthogonal,
)

__all__ = [
    "BallSpec",
    "Basis",
    "CvpInstance",
    "LatticeVector",
    "PNorm",
    "count_points",
    "count_primitive",
    "enumerate_points",
    "left_inverse",
    "lp_norm",
    "primitive_part",
    "project_orthogonal",
]
