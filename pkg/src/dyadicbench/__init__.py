"""Finite dyadic workbench for multilinear sparse operators and multiple weights."""
from .dyadic import (
    CellFunction, Cube, GridId, ModelConfig, children, cube_average, cube_integral, cube_mask,
    cubes_at_level,
)
from .weights import ExponentSystem, WeightVector, combined_weight, dual_weight, power_weight_cells
from .constants import (
    ConstantReport, ainfty_constant, apq_per_cube, multilinear_ap_constant, transform_vector,
)
from .sparse import SparseFamily, cz_sparse_from_functions, random_sparse, verify_sparse
from .operators import (
    dyadic_maximal, level_set_decomposition, multi_grid_maximal, riesz_like_apply, sparse_operator,
)
from .norms import lp_norm, weak_lp_norm

__version__ = "0.1.0"
