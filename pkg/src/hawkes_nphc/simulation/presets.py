"""
Block-structured benchmark models (Rect10, PLaw10, Exp10, Exp100).

G carries a constant alpha on three blocks built from three contiguous
node groups, each block with its own time scale:

    lower block    rows group 2 <- cols group 0   beta_0  (slow)
    square block   rows group 1 <- cols group 1   beta_1
    upper block    rows group 0 <- cols group 2   beta_2  (fast)

Group 1 excites itself and groups 0 and 2 excite each other, so the
spectral radius is alpha * max(n_1, sqrt(n_0 n_2)). The default groups
split d as 3/3/4 and shrink, keeping that ratio, until the radius is
below MAX_BLOCK_RADIUS; nodes left over carry no excitation.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import StabilityViolation, ValidationError
from ..model import EPS_STAB, HawkesModel, KernelShape, KernelSpec, g_to_r, spectral_radius

DEFAULT_BETAS = (0.1, 1.0, 10.0)
DEFAULT_GAMMA = 0.5
# (row group, col group, beta index)
DEFAULT_BLOCKS: Tuple[Tuple[int, int, int], ...] = ((2, 0, 0), (1, 1, 1), (0, 2, 2))
MAX_BLOCK_RADIUS = 0.75


def _group_bounds(d: int, sizes: Sequence[int]) -> List[Tuple[int, int]]:
    """Group 0 at the top, group 2 at the bottom, group 1 centered in between."""
    n0, n1, n2 = sizes
    start1 = n0 + (d - n0 - n1 - n2) // 2
    return [(0, n0), (start1, start1 + n1), (d - n2, d)]


def _block_integrals(d: int, alpha: float, sizes: Sequence[int],
                     blocks: Sequence[Tuple[int, int, int]]) -> np.ndarray:
    bounds = _group_bounds(d, sizes)
    G = np.zeros((d, d))
    for row_group, col_group, _ in blocks:
        (r0, r1), (c0, c1) = bounds[row_group], bounds[col_group]
        G[r0:r1, c0:c1] = alpha
    return G


def default_group_sizes(d: int, alpha: Optional[float] = None,
                        blocks: Sequence[Tuple[int, int, int]] = DEFAULT_BLOCKS
                        ) -> Tuple[int, int, int]:
    """
    3/3/4 split of d (10 -> (3, 3, 4)), shrunk for large alpha * d.

    With alpha given, the groups shrink in the same proportions until the
    block spectral radius drops below MAX_BLOCK_RADIUS, so d=100 at
    alpha=1/10 gives (6, 6, 8).
    """
    if d < 3:
        raise ValidationError(f"Block models need d >= 3, got {d}")
    head = max(1, int(round(0.3 * d)))
    tail = d - 2 * head
    if alpha is None or alpha <= 0:
        return head, head, tail
    size = head
    while True:
        sizes = (size, size, tail if size == head else max(1, int(round(size * tail / head))))
        if size == 1 or spectral_radius(_block_integrals(d, alpha, sizes, blocks)) \
                < MAX_BLOCK_RADIUS:
            return sizes
        size -= 1


def make_block_model(d: int, shape: KernelShape, alpha: float,
                     betas: Sequence[float] = DEFAULT_BETAS, gamma: float = DEFAULT_GAMMA,
                     mu: float = 1.0,
                     group_sizes: Optional[Sequence[int]] = None,
                     blocks: Sequence[Tuple[int, int, int]] = DEFAULT_BLOCKS) -> HawkesModel:
    """
    Build a three-block benchmark model.

    Args:
        d: Number of nodes
        shape: Kernel shape used on every block
        alpha: Constant g^{ij} on the blocks
        betas: (beta_0, beta_1, beta_2)
        gamma: Delay (rectangular) or tail exponent (power law)
        mu: Baseline intensity, scalar or length-d
        group_sizes: Sizes of the three node groups, at most d in total
        blocks: (row group, col group, beta index) triples

    Returns:
        HawkesModel with zero kernels outside the blocks
    """
    shape = KernelShape(shape)
    if len(betas) != 3:
        raise ValidationError(f"Expected three betas, got {len(betas)}")
    if group_sizes is None:
        sizes = default_group_sizes(d, alpha, blocks)
    else:
        sizes = tuple(int(n) for n in group_sizes)
    if len(sizes) != 3 or sum(sizes) > d or min(sizes) <= 0:
        raise ValidationError(f"Group sizes {sizes} do not fit three groups into d={d}")
    bounds = _group_bounds(d, sizes)

    grid = [[KernelSpec.zero() for _ in range(d)] for _ in range(d)]
    if alpha > 0 and shape != KernelShape.ZERO:
        for row_group, col_group, beta_index in blocks:
            kernel = KernelSpec(shape, alpha=alpha, beta=betas[beta_index], gamma=gamma)
            (r0, r1), (c0, c1) = bounds[row_group], bounds[col_group]
            for i in range(r0, r1):
                for j in range(c0, c1):
                    grid[i][j] = kernel

    mu_vec = np.broadcast_to(np.asarray(mu, dtype=float), (d,)).copy()
    model = HawkesModel(mu=mu_vec, kernels=tuple(tuple(row) for row in grid))
    radius = spectral_radius(model.integral_matrix())
    if radius >= 1.0 - EPS_STAB:
        raise StabilityViolation(f"Block model is unstable (spectral radius {radius:.4g})",
                                 spectral_radius=radius)
    return model


@dataclass(frozen=True)
class Preset:
    """
    Benchmark dataset definition; unspecified values take the module defaults.

    mean_rate sets the time unit: at a fixed number of events per node, a
    lower rate means fewer events per window of width 2H and less noisy
    cumulants.
    """
    name: str
    d: int
    shape: KernelShape
    alpha: float
    H: Optional[float]
    betas: Tuple[float, float, float] = DEFAULT_BETAS
    gamma: float = DEFAULT_GAMMA
    mean_rate: float = 1.0
    events_per_node: float = 1e5

    def build(self, alpha: Optional[float] = None, mu: Optional[float] = None,
              gamma: Optional[float] = None, beta0: Optional[float] = None,
              group_sizes: Optional[Sequence[int]] = None) -> HawkesModel:
        """Model with a uniform baseline scaled so the mean rate over nodes is mean_rate."""
        alpha = self.alpha if alpha is None else alpha
        gamma = self.gamma if gamma is None else gamma
        betas = self.betas if beta0 is None else (beta0, beta0 * 10.0, beta0 * 100.0)
        model = make_block_model(self.d, self.shape, alpha, betas, gamma, mu=1.0,
                                 group_sizes=group_sizes)
        if mu is None:
            unit_rates = g_to_r(model.integral_matrix()) @ np.ones(self.d)
            mu = self.mean_rate / float(np.mean(unit_rates))
        return HawkesModel(mu=np.full(self.d, float(mu)), kernels=model.kernels)

    def horizon_for(self, events_per_node: Optional[float] = None) -> float:
        """T giving the requested mean number of events per node."""
        target = self.events_per_node if events_per_node is None else float(events_per_node)
        return target / self.mean_rate


# 2 * H * mean_rate = 4 expected events per window on every preset
PRESETS: Dict[str, Preset] = {
    "rect10": Preset("rect10", 10, KernelShape.RECTANGULAR, 1.0 / 6.0, H=50.0, mean_rate=0.04),
    "plaw10": Preset("plaw10", 10, KernelShape.POWER_LAW, 1.0 / 6.0, H=1000.0,
                     mean_rate=0.002),
    "exp10": Preset("exp10", 10, KernelShape.EXPONENTIAL, 1.0 / 6.0, H=100.0, mean_rate=0.02),
    "exp100": Preset("exp100", 100, KernelShape.EXPONENTIAL, 1.0 / 10.0, H=100.0,
                     mean_rate=0.02),
}


def get_preset(name: str) -> Preset:
    key = name.lower()
    if key not in PRESETS:
        raise ValidationError(f"Unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return PRESETS[key]
