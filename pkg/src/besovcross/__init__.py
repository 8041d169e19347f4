"""Dyadic block decompositions, mixed-smoothness Besov norms and hyperbolic-cross
spectral approximation on uniform grids."""

from .approximation import (ApproximationResult, approximate_hyperbolic, error_budgeted,
                            error_hyperbolic, partial_sum)
from .decomposition import (BesovParams, SmoothnessVector, apply_block, apply_sharp_block,
                            besov_norm, check_nikolsky, check_norm_equivalence, reconstruct)
from .extremal import extremal_f1, extremal_f2, extremal_f3, normalize_to_class
from .index_sets import IndexSet, greedy_select, hyperbolic_cross, layer
from .kernels import block_multiplier_weight, kernel_time_value, trapezoid_weight
from .reports import RateReport, fit_loglog
from .sampling import GridSpec, NyquistError, SampledField, read_field, write_field

__version__ = "0.1.0"
