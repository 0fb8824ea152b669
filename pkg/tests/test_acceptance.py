"""End-to-end recovery checks on the benchmark presets. All marked slow."""

import time

import numpy as np
import pytest

from hawkes_nphc.cumulants import CumulantConfig, estimate_cumulants
from hawkes_nphc.estimation import solve, theoretical_cumulants
from hawkes_nphc.evaluation import mean_rank_corr, rel_err
from hawkes_nphc.model import EventSequences, HawkesModel, KernelShape, KernelSpec
from hawkes_nphc.simulation import SimulationConfig, get_preset, run_seeds, simulate

pytestmark = pytest.mark.slow


def exp_model(mu, G, beta=1.0):
    G = np.asarray(G, dtype=float)
    kernels = tuple(
        tuple(KernelSpec(KernelShape.EXPONENTIAL, alpha=g, beta=beta) if g > 0 else KernelSpec.zero()
              for g in row)
        for row in G)
    return HawkesModel(mu=np.asarray(mu, dtype=float), kernels=kernels)


def fit_preset(name: str, events_per_node: float, seed: int = 7):
    preset = get_preset(name)
    model = preset.build()
    result = simulate(model, SimulationConfig(horizon_T=preset.horizon_for(events_per_node),
                                              seed=seed))
    cum = estimate_cumulants(result.events, CumulantConfig(H=preset.H))
    return model.integral_matrix(), solve(cum).G_hat


def test_rect10_recovery():
    """Rect10 at 5e4 events per node: RelErr <= 0.05 and MRankCorr >= 0.25."""
    G, G_hat = fit_preset("rect10", 5e4)
    assert rel_err(G, G_hat) <= 0.05
    assert mean_rank_corr(G, G_hat) >= 0.25


@pytest.mark.parametrize("name", ["plaw10", "exp10"])
def test_kernel_shape_robustness(name):
    """The same pipeline works unchanged for power-law and exponential kernels."""
    G, G_hat = fit_preset(name, 5e4)
    assert rel_err(G, G_hat) <= 0.08


def test_exp100_end_to_end():
    """d = 100 runs through the whole pipeline."""
    G, G_hat = fit_preset("exp100", 1e4)
    assert G_hat.shape == (100, 100)
    assert np.all(np.isfinite(G_hat))


def test_poisson_null():
    """G = 0 gives an estimate with every entry below 0.05."""
    model = exp_model([1.0, 1.0], np.zeros((2, 2)))
    result = simulate(model, SimulationConfig(horizon_T=1e5, seed=3))
    cum = estimate_cumulants(result.events, CumulantConfig(H=10.0))
    assert np.max(np.abs(solve(cum).G_hat)) <= 0.05


def test_consistency_trend():
    """Median cumulant and recovery errors do not grow with T when H = T^0.3."""
    G = np.array([[0.2, 0.1], [0.3, 0.25]])
    model = exp_model([0.5, 0.3], G)
    truth = theoretical_cumulants(model)
    medians = []
    for T in (1e3, 1e4, 1e5):
        cfg = CumulantConfig(H=T ** 0.3)
        c_err, k_err, g_err = [], [], []
        for result in run_seeds(model, SimulationConfig(horizon_T=T), range(10)):
            cum = estimate_cumulants(result.events, cfg)
            c_err.append(np.linalg.norm(cum.C - truth.C))
            k_err.append(np.linalg.norm(cum.Kc - truth.Kc))
            g_err.append(rel_err(G, solve(cum).G_hat))
        medians.append((np.median(c_err), np.median(k_err), np.median(g_err)))
    for earlier, later in zip(medians, medians[1:]):
        assert later[0] <= earlier[0]
        assert later[1] <= earlier[1]
        assert later[2] <= earlier[2]


def poisson_events(d: int, n: int, seed: int = 0) -> EventSequences:
    rng = np.random.default_rng(seed)
    T = float(n)
    return EventSequences(horizon_T=T,
                          events=tuple(np.unique(rng.uniform(0.0, T, size=n)) for _ in range(d)))


def cumulant_seconds(events: EventSequences, H: float) -> float:
    best = float("inf")
    for _ in range(3):
        started = time.perf_counter()
        estimate_cumulants(events, CumulantConfig(H=H, workers=1))
        best = min(best, time.perf_counter() - started)
    return best


def test_cumulant_scaling():
    """Doubling n costs at most 2.5x; doubling d costs at most 5x."""
    base = cumulant_seconds(poisson_events(10, 100_000), 50.0)
    assert cumulant_seconds(poisson_events(10, 200_000), 50.0) <= 2.5 * base
    assert cumulant_seconds(poisson_events(20, 100_000), 50.0) <= 5.0 * base


def test_scalar_cumulants_match_closed_form():
    """mu=0.1, g=0.5: Lambda = 0.2, C = Lambda R^2 = 0.8 and Kc = 3 R^2 C - 2 Lambda R^3 = 6.4."""
    model = exp_model([0.1], [[0.5]])
    truth = theoretical_cumulants(model)
    np.testing.assert_allclose([truth.Lambda[0], truth.C[0, 0], truth.Kc[0, 0]], [0.2, 0.8, 6.4])
    cfg = CumulantConfig(H=20.0)
    estimates = np.array([
        [cum.Lambda[0], cum.C[0, 0], cum.Kc[0, 0]]
        for cum in (estimate_cumulants(result.events, cfg)
                    for result in run_seeds(model, SimulationConfig(horizon_T=1e5), range(5)))
    ])
    Lambda, C, Kc = estimates.mean(axis=0)
    assert Lambda == pytest.approx(0.2, rel=0.05)
    assert C == pytest.approx(0.8, rel=0.10)
    assert Kc == pytest.approx(6.4, rel=0.20)
