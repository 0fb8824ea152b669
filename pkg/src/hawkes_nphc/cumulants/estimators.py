"""
Integrated cumulant estimators: mean intensity, integrated covariance and
the contracted integrated skewness K^{iij}.

Windows are half-open, (tau - H, tau + H], and include the center event.
Window counts come from binary searches over the sorted timestamps and
the pair sums sum_{x in Z^j} sum_{y in Z^k} (2H - |x - y|)^+ from prefix
sums, so the cost is O(n d^2 log n) for n events per node.

Boundary modes:
    PAPER_EXACT  sums over every event, normalizes by T
    TRIMMED      sums over centers in [H, T - H], normalizes by T - 2H,
                 windows are centered with the full-sample rate N_T / T
"""

import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from ..errors import EmptyDataWarning, InvalidWindow, ValidationError
from ..model import EventSequences
from ..pool import map_ordered

# rows of the per-center deviation matrix processed at once
CHUNK_CELLS = 2_000_000


class BoundaryMode(Enum):
    PAPER_EXACT = "paper_exact"
    TRIMMED = "trimmed"


@dataclass(frozen=True)
class CumulantConfig:
    """Window half-width H plus boundary and symmetrization options."""
    H: float
    boundary_mode: BoundaryMode = BoundaryMode.TRIMMED
    symmetrize: bool = True
    workers: Optional[int] = None

    def __post_init__(self):
        if not np.isfinite(self.H) or self.H <= 0:
            raise InvalidWindow(f"H must be positive, got {self.H}")
        object.__setattr__(self, "H", float(self.H))
        object.__setattr__(self, "boundary_mode", BoundaryMode(self.boundary_mode))

    def check_against(self, horizon_T: float):
        if 2.0 * self.H >= horizon_T:
            raise InvalidWindow(f"Window 2H = {2.0 * self.H:g} must be below T = {horizon_T:g}",
                                H=self.H, T=horizon_T)


@dataclass(frozen=True, eq=False)
class IntegratedCumulants:
    """Estimated (or exact) Lambda, C and Kc = [K^{iij}]."""
    Lambda: np.ndarray
    C: np.ndarray
    Kc: np.ndarray
    H_used: float = 0.0
    T_used: float = 0.0
    boundary_mode: Optional[BoundaryMode] = None
    symmetrized: bool = False

    def __post_init__(self):
        Lambda = np.asarray(self.Lambda, dtype=float).ravel()
        d = Lambda.size
        C = np.asarray(self.C, dtype=float).reshape(d, d)
        Kc = np.asarray(self.Kc, dtype=float).reshape(d, d)
        if np.any(Lambda < 0):
            raise ValidationError("Mean intensities must be >= 0")
        for name, value in (("Lambda", Lambda), ("C", C), ("Kc", Kc)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def d(self) -> int:
        return self.Lambda.size

    def manifest(self) -> Dict[str, Any]:
        return {
            "d": self.d,
            "H": self.H_used,
            "T": self.T_used,
            "boundary_mode": self.boundary_mode.value if self.boundary_mode else None,
            "symmetrized": self.symmetrized,
        }


@dataclass
class _Layout:
    """Per-mode center sets and normalizations shared by every estimator."""
    events: EventSequences
    H: float
    T: float
    T_center: float
    centers: List[np.ndarray]
    Lambda_hat: np.ndarray
    Lambda_center: np.ndarray


def _layout(events: EventSequences, cfg: CumulantConfig) -> _Layout:
    T = events.horizon_T
    H = cfg.H
    cfg.check_against(T)
    counts = events.counts().astype(float)
    if cfg.boundary_mode == BoundaryMode.PAPER_EXACT:
        centers = list(events.events)
        T_center = T
        Lambda_hat = counts / T
        Lambda_center = Lambda_hat
    else:
        centers = [z[(z >= H) & (z <= T - H)] for z in events.events]
        T_center = T - 2.0 * H
        Lambda_hat = np.array([c.size for c in centers], dtype=float) / T_center
        Lambda_center = counts / T
    return _Layout(events, H, T, T_center, centers, Lambda_hat, Lambda_center)


def _warn_if_empty(events: EventSequences) -> bool:
    if events.is_empty():
        warnings.warn("All event sequences are empty; cumulants are zero", EmptyDataWarning,
                      stacklevel=3)
        logger.warning("All {} event sequences are empty", events.d)
        return True
    return False


def window_counts(centers: np.ndarray, times: np.ndarray, H: float) -> np.ndarray:
    """#{t in times : c - H < t <= c + H} for every center c."""
    return (np.searchsorted(times, centers + H, side="right")
            - np.searchsorted(times, centers - H, side="right"))


def pair_sum(a: np.ndarray, b: np.ndarray, width: float) -> float:
    """sum over x in a, y in b of (width - |x - y|)^+ for sorted a, b."""
    if a.size == 0 or b.size == 0:
        return 0.0
    # extended precision keeps the prefix-sum differences exact enough
    prefix = np.concatenate([[0.0], np.cumsum(b, dtype=np.longdouble)])
    x = a.astype(np.longdouble)
    lo = np.searchsorted(b, a - width, side="right")
    mid = np.searchsorted(b, a, side="left")
    hi = np.searchsorted(b, a + width, side="left")
    left = (width - x) * (mid - lo) + (prefix[mid] - prefix[lo])
    right = (width + x) * (hi - mid) - (prefix[hi] - prefix[mid])
    return float(np.sum(left + right))


def _center_moments(layout: _Layout, c: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    For center node c, with D[tau, j] = window count of j around tau - 2H Lambda^j:

        first[j]  = sum_tau D[tau, j]
        cross[j]  = sum_tau D[tau, c] * D[tau, j]
        square[j] = sum_tau D[tau, j] ** 2
    """
    d = layout.events.d
    centers = layout.centers[c]
    first = np.zeros(d)
    cross = np.zeros(d)
    square = np.zeros(d)
    if centers.size == 0:
        return first, cross, square

    shift = 2.0 * layout.H * layout.Lambda_center
    rows = max(1, CHUNK_CELLS // d)
    for start in range(0, centers.size, rows):
        chunk = centers[start:start + rows]
        D = np.empty((chunk.size, d))
        for j in range(d):
            D[:, j] = window_counts(chunk, layout.events[j], layout.H) - shift[j]
        first += D.sum(axis=0)
        cross += D[:, c] @ D
        square += np.einsum("tj,tj->j", D, D)
    return first, cross, square


def _all_center_moments(layout: _Layout, workers: Optional[int]):
    d = layout.events.d
    results = map_ordered(lambda c: _center_moments(layout, c), range(d), workers=workers)
    first = np.array([r[0] for r in results])
    cross = np.array([r[1] for r in results])
    square = np.array([r[2] for r in results])
    return first, cross, square


def _pair_sums(layout: _Layout, workers: Optional[int]) -> np.ndarray:
    d = layout.events.d
    width = 2.0 * layout.H
    pairs = [(j, k) for j in range(d) for k in range(j, d)]
    values = map_ordered(
        lambda jk: pair_sum(layout.events[jk[0]], layout.events[jk[1]], width),
        pairs, workers=workers)
    P = np.zeros((d, d))
    for (j, k), value in zip(pairs, values):
        P[j, k] = P[k, j] = value
    return P


def estimate_mean(events: EventSequences, cfg: Optional[CumulantConfig] = None) -> np.ndarray:
    """Lambda-hat: N_T / T, or the trimmed count over T - 2H when cfg asks for it."""
    if _warn_if_empty(events):
        return np.zeros(events.d)
    if cfg is None:
        return events.counts() / events.horizon_T
    return _layout(events, cfg).Lambda_hat.copy()


def _covariance_from(layout: _Layout, first: np.ndarray, symmetrize: bool) -> np.ndarray:
    C = first / layout.T_center
    if symmetrize:
        C = 0.5 * (C + C.T)
    return C


def _skewness_from(layout: _Layout, cross: np.ndarray, square: np.ndarray, P: np.ndarray,
                   symmetrize: bool) -> np.ndarray:
    H = layout.H
    L_hat = layout.Lambda_hat
    L_c = layout.Lambda_center
    # K^{iij}: center i, windows (i, j)
    K_iij = (cross / layout.T_center
             - L_hat[:, None] * P / layout.T
             + 4.0 * H * H * (L_hat * L_c)[:, None] * L_c[None, :])
    if not symmetrize:
        return K_iij
    # K^{jii} stored at [i, j]: center j, windows (i, i)
    K_jii = (square.T / layout.T_center
             - L_hat[None, :] * np.diag(P)[:, None] / layout.T
             + 4.0 * H * H * L_hat[None, :] * (L_c * L_c)[:, None])
    Kc = (2.0 * K_iij + K_jii) / 3.0
    np.fill_diagonal(Kc, np.diag(K_iij))
    return Kc


def estimate_covariance(events: EventSequences, cfg: CumulantConfig) -> np.ndarray:
    """Integrated covariance C-hat, symmetrized as (C + C^T) / 2 when requested."""
    layout = _layout(events, cfg)
    if _warn_if_empty(events):
        return np.zeros((events.d, events.d))
    first, _, _ = _all_center_moments(layout, cfg.workers)
    return _covariance_from(layout, first, cfg.symmetrize)


def estimate_skewness_contracted(events: EventSequences, cfg: CumulantConfig) -> np.ndarray:
    """
    Contracted third cumulant [K^{iij}].

    With symmetrize, off-diagonal entries average the (i,i,j), (i,j,i) and
    (j,i,i) index patterns.
    """
    layout = _layout(events, cfg)
    if _warn_if_empty(events):
        return np.zeros((events.d, events.d))
    _, cross, square = _all_center_moments(layout, cfg.workers)
    P = _pair_sums(layout, cfg.workers)
    return _skewness_from(layout, cross, square, P, cfg.symmetrize)


def estimate_cumulants(events: EventSequences, cfg: CumulantConfig) -> IntegratedCumulants:
    """All three integrated cumulants in one pass over the data."""
    layout = _layout(events, cfg)
    d = events.d
    if _warn_if_empty(events):
        zeros = np.zeros((d, d))
        return IntegratedCumulants(np.zeros(d), zeros, zeros, cfg.H, events.horizon_T,
                                   cfg.boundary_mode, cfg.symmetrize)

    first, cross, square = _all_center_moments(layout, cfg.workers)
    P = _pair_sums(layout, cfg.workers)
    C = _covariance_from(layout, first, cfg.symmetrize)
    Kc = _skewness_from(layout, cross, square, P, cfg.symmetrize)
    logger.info("Estimated cumulants for d={} from {} events (H={:g}, {})",
                d, events.total_events, cfg.H, cfg.boundary_mode.value)
    return IntegratedCumulants(layout.Lambda_hat.copy(), C, Kc, cfg.H, events.horizon_T,
                               cfg.boundary_mode, cfg.symmetrize)


def h_grid_table(events: EventSequences, H_values: Sequence[float],
                 boundary_mode: BoundaryMode = BoundaryMode.TRIMMED,
                 workers: Optional[int] = None) -> List[Dict[str, float]]:
    """Frobenius norm and trace of C-hat for each H; the plateau suggests a good H."""
    rows = []
    for H in H_values:
        cfg = CumulantConfig(H=H, boundary_mode=boundary_mode, workers=workers)
        C = estimate_covariance(events, cfg)
        rows.append({"H": float(H),
                     "frobenius_C": float(np.linalg.norm(C)),
                     "trace_C": float(np.trace(C))})
    return rows
