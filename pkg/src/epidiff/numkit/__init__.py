"""Deterministic numerical kernels: symmetric eigendecomposition, pseudoinverse,
polyhedra with tangent/normal cones, vertex enumeration, and a small LP solver."""

from .sym import (
    SymMatrix,
    as_sym_matrix,
    sym_eig,
    pinv,
    operator_norm,
    svec,
    smat,
    smat_batch,
    svec_dim,
)
from .polyhedra import (
    Polyhedron,
    PolyCone,
    box,
    contains,
    cone_generators,
    intersect,
    lp_max,
    min_norm_point,
    project,
    recession_cone,
    tangent_cone,
    vertices,
    vrep_to_hrep,
)

__all__ = [
    "SymMatrix",
    "as_sym_matrix",
    "sym_eig",
    "pinv",
    "operator_norm",
    "svec",
    "smat",
    "smat_batch",
    "svec_dim",
    "Polyhedron",
    "PolyCone",
    "box",
    "contains",
    "cone_generators",
    "intersect",
    "lp_max",
    "min_norm_point",
    "project",
    "recession_cone",
    "tangent_cone",
    "vertices",
    "vrep_to_hrep",
]
