from .presets import PRESETS, Preset, get_preset, make_block_model
from .thinning import (
    RNG_ALGORITHM,
    PowerLawEngine,
    SimulationConfig,
    SimulationResult,
    branching_ratios,
    dominating_bound,
    intensity_at,
    run_seeds,
    simulate,
)

__all__ = [
    "PRESETS",
    "Preset",
    "get_preset",
    "make_block_model",
    "RNG_ALGORITHM",
    "PowerLawEngine",
    "SimulationConfig",
    "SimulationResult",
    "branching_ratios",
    "dominating_bound",
    "intensity_at",
    "run_seeds",
    "simulate",
]
