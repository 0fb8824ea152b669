"""
Reference implementation of the cumulant estimators with naive double
loops. Used as a test oracle for the fast estimators.
"""

import math

import numpy as np

from ..errors import TooLarge
from ..model import EventSequences
from .estimators import BoundaryMode, CumulantConfig, IntegratedCumulants

MAX_ORACLE_EVENTS = 10_000


def brute_force_cumulants(events: EventSequences, cfg: CumulantConfig) -> IntegratedCumulants:
    """Evaluate Lambda, C and the full K^{ijk} tensor literally, then contract."""
    total = events.total_events
    if total > MAX_ORACLE_EVENTS:
        raise TooLarge(f"Oracle is limited to {MAX_ORACLE_EVENTS} events, got {total}",
                       events=total)
    d = events.d
    T = events.horizon_T
    H = cfg.H
    cfg.check_against(T)

    counts = np.array([len(z) for z in events.events], dtype=float)
    if cfg.boundary_mode == BoundaryMode.PAPER_EXACT:
        centers = [list(z) for z in events.events]
        T_center = T
        Lambda_hat = counts / T
        Lambda_center = Lambda_hat
    else:
        centers = [[tau for tau in z if H <= tau <= T - H] for z in events.events]
        T_center = T - 2.0 * H
        Lambda_hat = np.array([len(c) for c in centers], dtype=float) / T_center
        Lambda_center = counts / T

    C = np.zeros((d, d))
    first_order = np.zeros((d, d, d))
    for i in range(d):
        for tau in centers[i]:
            deviation = np.zeros(d)
            for j in range(d):
                inside = 0
                for t in events[j]:
                    if tau - H < t <= tau + H:
                        inside += 1
                deviation[j] = inside - 2.0 * H * Lambda_center[j]
            for j in range(d):
                C[i, j] += deviation[j]
                for k in range(d):
                    first_order[i, j, k] += deviation[j] * deviation[k]
    C /= T_center

    pair = np.zeros((d, d))
    for j in range(d):
        for k in range(d):
            # correctly rounded sum, so pair[j, k] == pair[k, j] exactly
            pair[j, k] = math.fsum(max(2.0 * H - abs(x - y), 0.0)
                                   for x in events[j] for y in events[k])

    K = np.zeros((d, d, d))
    for i in range(d):
        for j in range(d):
            for k in range(d):
                K[i, j, k] = (first_order[i, j, k] / T_center
                              - Lambda_hat[i] * pair[j, k] / T
                              + 4.0 * H * H * Lambda_hat[i] * Lambda_center[j] * Lambda_center[k])

    Kc = np.zeros((d, d))
    for i in range(d):
        for j in range(d):
            if cfg.symmetrize and i != j:
                Kc[i, j] = (K[i, i, j] + K[i, j, i] + K[j, i, i]) / 3.0
            else:
                Kc[i, j] = K[i, i, j]
    if cfg.symmetrize:
        C = 0.5 * (C + C.T)

    return IntegratedCumulants(Lambda_hat, C, Kc, H, T, cfg.boundary_mode, cfg.symmetrize)
