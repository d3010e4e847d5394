"""Lagrange finite elements for the complex-scaled Helmholtz problem."""

from .assembly import (
    AssembledSystem,
    PlaneWave,
    assemble,
    assemble_matrix,
    constrain,
    element_matrices,
    load_vector,
    scattering_rhs,
    scattering_system,
)
from .io import error_record, write_error_records, write_solution_csv
from .norms import WeightedNorm, best_approximation, error_norm, gram, project
from .quadrature import triangle_rule
from .solve import SolverConfig, block_jacobi, solve_fem
from .space import FemSpace, build_space, expected_dof_count, shape_functions

__all__ = [
    "AssembledSystem",
    "FemSpace",
    "PlaneWave",
    "SolverConfig",
    "WeightedNorm",
    "assemble",
    "assemble_matrix",
    "best_approximation",
    "block_jacobi",
    "build_space",
    "constrain",
    "element_matrices",
    "error_norm",
    "error_record",
    "expected_dof_count",
    "gram",
    "load_vector",
    "project",
    "scattering_rhs",
    "scattering_system",
    "shape_functions",
    "solve_fem",
    "triangle_rule",
    "write_error_records",
    "write_solution_csv",
]
