"""Second-kind boundary integral equations on the unit circle."""

from .galerkin import (
    BemResult,
    BoundaryGrid,
    assemble_bie,
    discrete_norms,
    exact_density,
    plane_wave_data,
    plane_wave_rhs,
    single_layer_far_field,
    solve_bie_and_metrics,
)
from .special import bessel, jy_table
from .symbols import BieOperator, layer_symbol, symbol_table

__all__ = [
    "BemResult",
    "BieOperator",
    "BoundaryGrid",
    "assemble_bie",
    "bessel",
    "discrete_norms",
    "exact_density",
    "jy_table",
    "layer_symbol",
    "plane_wave_data",
    "plane_wave_rhs",
    "single_layer_far_field",
    "solve_bie_and_metrics",
    "symbol_table",
]
