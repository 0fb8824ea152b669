"""
Core domain types: observed event data, the ground-truth Hawkes model and
the G / R causality pair.
"""

from dataclasses import dataclass
from typing import Any, Dict, Iterable, Sequence, Tuple

import numpy as np

from ..errors import ShapeMismatch, ValidationError
from .kernels import KernelSpec
from .linalg import EPS_STAB, g_to_r, r_to_g, spectral_radius


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class EventSequences:
    """
    Per-node sorted timestamps observed on [0, horizon_T].

    Within one node timestamps must be strictly increasing; ties across
    nodes are allowed.
    """
    horizon_T: float
    events: Tuple[np.ndarray, ...]

    def __post_init__(self):
        horizon = float(self.horizon_T)
        if not np.isfinite(horizon) or horizon <= 0:
            raise ValidationError(f"horizon_T must be positive and finite, got {self.horizon_T}")
        object.__setattr__(self, "horizon_T", horizon)

        frozen = []
        for node, times in enumerate(self.events):
            times = np.asarray(times, dtype=float).ravel()
            if times.size:
                if not np.all(np.isfinite(times)):
                    raise ValidationError(f"Node {node} has non-finite timestamps", node=node)
                if times[0] < 0 or times[-1] > horizon:
                    raise ValidationError(
                        f"Node {node} has timestamps outside [0, {horizon}]", node=node)
                steps = np.diff(times)
                if np.any(steps <= 0):
                    bad = int(np.argmax(steps <= 0))
                    raise ValidationError(
                        f"Node {node} timestamps are not strictly increasing "
                        f"(position {bad + 1}: {times[bad + 1]!r})",
                        node=node, position=bad + 1)
            frozen.append(_frozen(times))
        if not frozen:
            raise ValidationError("EventSequences needs at least one node")
        object.__setattr__(self, "events", tuple(frozen))

    @classmethod
    def from_lists(cls, events: Iterable[Sequence[float]], horizon_T: float) -> "EventSequences":
        return cls(horizon_T=horizon_T, events=tuple(np.asarray(e, dtype=float) for e in events))

    @classmethod
    def empty(cls, d: int, horizon_T: float) -> "EventSequences":
        return cls(horizon_T=horizon_T, events=tuple(np.empty(0) for _ in range(d)))

    @property
    def d(self) -> int:
        return len(self.events)

    def counts(self) -> np.ndarray:
        return np.array([len(e) for e in self.events], dtype=int)

    @property
    def total_events(self) -> int:
        return int(self.counts().sum())

    def is_empty(self) -> bool:
        return self.total_events == 0

    def __len__(self) -> int:
        return self.d

    def __getitem__(self, node: int) -> np.ndarray:
        return self.events[node]

    def identical_to(self, other: "EventSequences") -> bool:
        """Bit-for-bit comparison of two datasets."""
        return (
            self.horizon_T == other.horizon_T
            and self.d == other.d
            and all(np.array_equal(a, b) for a, b in zip(self.events, other.events))
        )


@dataclass(frozen=True, eq=False)
class HawkesModel:
    """Baseline vector mu plus the d x d grid of kernels (entry (i, j) is phi^{ij})."""
    mu: np.ndarray
    kernels: Tuple[Tuple[KernelSpec, ...], ...]

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float).ravel()
        kernels = tuple(tuple(row) for row in self.kernels)
        d = mu.size
        if d == 0:
            raise ValidationError("HawkesModel needs at least one node")
        if len(kernels) != d or any(len(row) != d for row in kernels):
            raise ShapeMismatch(f"Kernel grid must be {d}x{d} to match mu")
        if np.any(~np.isfinite(mu)) or np.any(mu < 0):
            raise ValidationError("Baseline intensities mu must be finite and >= 0")
        object.__setattr__(self, "mu", _frozen(mu))
        object.__setattr__(self, "kernels", kernels)

    @property
    def d(self) -> int:
        return self.mu.size

    def integral_matrix(self) -> np.ndarray:
        """G with g^{ij} = integral of phi^{ij}."""
        return np.array([[k.integral() for k in row] for row in self.kernels])

    def spectral_radius(self) -> float:
        return spectral_radius(self.integral_matrix())

    def stable(self, eps_stab: float = 0.0) -> bool:
        return self.spectral_radius() < 1.0 - eps_stab

    def shapes(self):
        return {k.shape for row in self.kernels for k in row if not k.is_zero}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "d": self.d,
            "mu": self.mu.tolist(),
            "kernels": [[k.to_dict() for k in row] for row in self.kernels],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "HawkesModel":
        kernels = tuple(tuple(KernelSpec.from_dict(k) for k in row) for row in data["kernels"])
        return cls(mu=np.asarray(data["mu"], dtype=float), kernels=kernels)


@dataclass(frozen=True, eq=False)
class CausalityMatrices:
    """The pair G (kernel integrals) and R = (I - G)^-1."""
    G: np.ndarray
    R: np.ndarray

    @classmethod
    def from_g(cls, G, eps_stab: float = EPS_STAB) -> "CausalityMatrices":
        G = np.asarray(G, dtype=float)
        return cls(G=_frozen(G), R=_frozen(g_to_r(G, eps_stab)))

    @classmethod
    def from_r(cls, R) -> "CausalityMatrices":
        R = np.asarray(R, dtype=float)
        return cls(G=_frozen(r_to_g(R)), R=_frozen(R))


def theoretical_mean_intensity(model: HawkesModel) -> np.ndarray:
    """Lambda = R mu."""
    R = g_to_r(model.integral_matrix())
    return R @ model.mu
