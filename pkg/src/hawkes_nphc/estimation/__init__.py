from .forward import (
    compute_kappa,
    forward_covariance,
    forward_skewness_contracted,
    initial_point,
    loss,
    loss_and_gradient,
    loss_gradient,
    psd_square_root,
    skewness_tensor,
    theoretical_cumulants,
)
from .solver import AdagradOptimizer, SolveConfig, SolveResult, solve, threshold_matrix

__all__ = [
    "compute_kappa",
    "forward_covariance",
    "forward_skewness_contracted",
    "initial_point",
    "loss",
    "loss_and_gradient",
    "loss_gradient",
    "psd_square_root",
    "skewness_tensor",
    "theoretical_cumulants",
    "AdagradOptimizer",
    "SolveConfig",
    "SolveResult",
    "solve",
    "threshold_matrix",
]
