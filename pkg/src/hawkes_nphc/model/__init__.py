from .hawkes_model import (
    CausalityMatrices,
    EventSequences,
    HawkesModel,
    theoretical_mean_intensity,
)
from .kernels import KernelShape, KernelSpec
from .linalg import EPS_STAB, condition_number, g_to_r, r_to_g, spectral_radius

__all__ = [
    "CausalityMatrices",
    "EventSequences",
    "HawkesModel",
    "KernelShape",
    "KernelSpec",
    "EPS_STAB",
    "condition_number",
    "g_to_r",
    "r_to_g",
    "spectral_radius",
    "theoretical_mean_intensity",
]
