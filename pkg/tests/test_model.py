"""Tests for the Hawkes model types and the G / R linear algebra."""

import numpy as np
import pytest

from hawkes_nphc.errors import (
    NonConvergence,
    ShapeMismatch,
    SingularMatrix,
    StabilityViolation,
    ValidationError,
)
from hawkes_nphc.model import (
    CausalityMatrices,
    EventSequences,
    HawkesModel,
    KernelShape,
    KernelSpec,
    g_to_r,
    r_to_g,
    spectral_radius,
    theoretical_mean_intensity,
)


def exp_model(mu, G, beta=1.0):
    G = np.asarray(G, dtype=float)
    kernels = tuple(
        tuple(KernelSpec(KernelShape.EXPONENTIAL, alpha=g, beta=beta) if g > 0 else KernelSpec.zero()
              for g in row)
        for row in G)
    return HawkesModel(mu=np.asarray(mu, dtype=float), kernels=kernels)


def test_g_to_r_examples():
    """Identity, nilpotent and scalar cases."""
    np.testing.assert_array_equal(g_to_r(np.zeros((3, 3))), np.eye(3))
    np.testing.assert_allclose(g_to_r([[0, 0.5], [0, 0]]), [[1, 0.5], [0, 1]], atol=1e-15)
    np.testing.assert_allclose(g_to_r([[0.5]]), [[2.0]])


def test_r_to_g_examples():
    """Inverse map on the same cases."""
    np.testing.assert_allclose(r_to_g(np.eye(2)), np.zeros((2, 2)), atol=1e-15)
    np.testing.assert_allclose(r_to_g([[2.0]]), [[0.5]])
    np.testing.assert_allclose(r_to_g([[1, 0.5], [0, 1]]), [[0, 0.5], [0, 0]], atol=1e-15)


def test_unstable_and_singular():
    """Spectral radius at or above 1 - eps and singular R are rejected."""
    with pytest.raises(StabilityViolation):
        g_to_r([[1.0]])
    with pytest.raises(StabilityViolation):
        g_to_r([[0.6, 0.5], [0.5, 0.6]])
    with pytest.raises(SingularMatrix):
        r_to_g(np.zeros((2, 2)))
    with pytest.raises(ShapeMismatch):
        g_to_r(np.zeros((2, 3)))


@pytest.mark.parametrize("seed", range(200))
def test_round_trip_random(seed):
    """r_to_g(g_to_r(G)) recovers random stable G; R - I stays non-negative."""
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 8))
    G = rng.uniform(0.0, 0.8 / d, size=(d, d))
    R = g_to_r(G)
    np.testing.assert_allclose(R @ (np.eye(d) - G), np.eye(d), atol=1e-10)
    assert np.all(R - np.eye(d) >= -1e-10)
    np.testing.assert_allclose(r_to_g(R), G, atol=1e-8)


def test_spectral_radius_examples():
    """Zero, diagonal and a 2x2 with eigenvalues +-0.5."""
    assert spectral_radius(np.zeros((4, 4))) == 0.0
    assert spectral_radius(np.diag([0.3, 0.7])) == pytest.approx(0.7, abs=1e-10)
    assert spectral_radius([[0, 1], [0.25, 0]]) == pytest.approx(0.5, abs=1e-10)


def test_spectral_radius_signed_and_nilpotent():
    """Signed matrices and nilpotent G agree with the dense solver."""
    rng = np.random.default_rng(3)
    M = rng.normal(size=(6, 6))
    assert spectral_radius(M) == pytest.approx(np.max(np.abs(np.linalg.eigvals(M))), rel=1e-8)
    nilpotent = np.triu(np.ones((5, 5)), k=1) * 0.5
    assert spectral_radius(nilpotent) < 1e-3


def test_spectral_radius_without_fallback():
    """Complex-conjugate dominant eigenvalues never settle under power iteration."""
    oscillating = np.array([[0.0, 2.0], [-0.5, 0.0]])
    with pytest.raises(NonConvergence):
        spectral_radius(oscillating, max_iter=50, fallback=False)
    assert spectral_radius(oscillating) == pytest.approx(1.0)


def test_theoretical_mean_intensity():
    """Lambda = R mu."""
    np.testing.assert_allclose(theoretical_mean_intensity(exp_model([1, 2], np.zeros((2, 2)))),
                               [1, 2])
    np.testing.assert_allclose(theoretical_mean_intensity(exp_model([1.0], [[0.5]])), [2.0])
    np.testing.assert_allclose(
        theoretical_mean_intensity(exp_model([1, 1], [[0, 0.5], [0, 0]])), [1.5, 1.0])


def test_model_properties():
    """Integral matrix, stability and JSON round trip."""
    model = exp_model([0.5, 1.0], [[0.2, 0.3], [0.0, 0.4]])
    np.testing.assert_array_equal(model.integral_matrix(), [[0.2, 0.3], [0.0, 0.4]])
    assert model.stable()
    assert model.spectral_radius() == pytest.approx(0.4, abs=1e-10)
    assert model.shapes() == {KernelShape.EXPONENTIAL}

    copy = HawkesModel.from_dict(model.to_dict())
    np.testing.assert_array_equal(copy.mu, model.mu)
    assert copy.kernels == model.kernels

    assert not exp_model([1.0], [[1.0]]).stable()


def test_model_validation():
    """Kernel grid must match mu; mu must be non-negative."""
    with pytest.raises(ShapeMismatch):
        HawkesModel(mu=np.ones(2), kernels=((KernelSpec.zero(),),))
    with pytest.raises(ValidationError):
        HawkesModel(mu=np.array([-1.0]), kernels=((KernelSpec.zero(),),))


def test_causality_matrices():
    """The pair is consistent from either side."""
    pair = CausalityMatrices.from_g([[0.0, 0.5], [0.0, 0.0]])
    np.testing.assert_allclose(pair.R, [[1, 0.5], [0, 1]], atol=1e-15)
    back = CausalityMatrices.from_r(pair.R)
    np.testing.assert_allclose(back.G, pair.G, atol=1e-15)


def test_event_sequences_validation():
    """Timestamps must be finite, in range and strictly increasing per node."""
    events = EventSequences.from_lists([[1.0, 2.0, 3.0], []], horizon_T=4.0)
    assert events.d == 2
    assert events.counts().tolist() == [3, 0]
    assert events.total_events == 3
    assert not events.is_empty()
    assert EventSequences.empty(3, 10.0).is_empty()

    with pytest.raises(ValidationError):
        EventSequences.from_lists([[2.0, 1.0]], horizon_T=4.0)
    with pytest.raises(ValidationError):
        EventSequences.from_lists([[1.0, 1.0]], horizon_T=4.0)
    with pytest.raises(ValidationError):
        EventSequences.from_lists([[1.0, 5.0]], horizon_T=4.0)
    with pytest.raises(ValidationError):
        EventSequences.from_lists([[-1.0]], horizon_T=4.0)
    with pytest.raises(ValidationError):
        EventSequences.from_lists([[1.0]], horizon_T=0.0)


def test_cross_node_ties_allowed():
    """Two nodes may share a timestamp."""
    events = EventSequences.from_lists([[1.0, 2.0], [1.0, 2.0]], horizon_T=3.0)
    assert events.total_events == 4
    assert events.identical_to(EventSequences.from_lists([[1.0, 2.0], [1.0, 2.0]], 3.0))
    assert not events.identical_to(EventSequences.from_lists([[1.0, 2.0], [1.0]], 3.0))
