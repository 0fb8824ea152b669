from .brute_force import MAX_ORACLE_EVENTS, brute_force_cumulants
from .estimators import (
    BoundaryMode,
    CumulantConfig,
    IntegratedCumulants,
    estimate_covariance,
    estimate_cumulants,
    estimate_mean,
    estimate_skewness_contracted,
    h_grid_table,
    pair_sum,
    window_counts,
)

__all__ = [
    "MAX_ORACLE_EVENTS",
    "brute_force_cumulants",
    "BoundaryMode",
    "CumulantConfig",
    "IntegratedCumulants",
    "estimate_covariance",
    "estimate_cumulants",
    "estimate_mean",
    "estimate_skewness_contracted",
    "h_grid_table",
    "pair_sum",
    "window_counts",
]
