"""
Parametric kernel descriptions used for ground-truth simulation.

All shapes are normalized so that the integral over [0, inf) equals alpha:

    exponential   phi(t) = alpha * beta * exp(-beta * t)
    rectangular   phi(t) = alpha * beta * 1[gamma <= t <= gamma + 1/beta]
    power law     phi(t) = alpha * beta * gamma * (1 + beta * t) ** -(1 + gamma)
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Tuple

import numpy as np
from scipy.special import gamma as gamma_fn

from ..errors import InvalidKernel


class KernelShape(Enum):
    """Supported kernel shapes."""
    EXPONENTIAL = "exponential"
    RECTANGULAR = "rectangular"
    POWER_LAW = "power_law"
    ZERO = "zero"


# log-spaced grid for the power-law exponential mixture
MIXTURE_U_MIN = 1e-8
MIXTURE_U_MAX = 60.0
MIXTURE_LOG_STEP = 0.5


@dataclass(frozen=True)
class KernelSpec:
    """One kernel phi^{ij}: shape plus (alpha, beta, gamma)."""
    shape: KernelShape
    alpha: float = 0.0
    beta: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        if not isinstance(self.shape, KernelShape):
            object.__setattr__(self, "shape", KernelShape(self.shape))
        for name in ("alpha", "beta", "gamma"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidKernel(f"Kernel {name} must be finite, got {value}")
            object.__setattr__(self, name, value)

        if self.alpha < 0:
            raise InvalidKernel(f"Kernel alpha must be >= 0, got {self.alpha}")
        if self.beta <= 0:
            raise InvalidKernel(f"Kernel beta must be > 0, got {self.beta}")
        if self.shape == KernelShape.RECTANGULAR and self.gamma < 0:
            raise InvalidKernel(f"Rectangular delay gamma must be >= 0, got {self.gamma}")
        if self.shape == KernelShape.POWER_LAW and self.gamma <= 0:
            raise InvalidKernel(f"Power-law exponent gamma must be > 0, got {self.gamma}")
        if self.shape == KernelShape.ZERO and self.alpha != 0:
            raise InvalidKernel("Zero kernel cannot carry a positive alpha")

    @classmethod
    def zero(cls) -> "KernelSpec":
        return cls(KernelShape.ZERO)

    @property
    def is_zero(self) -> bool:
        return self.shape == KernelShape.ZERO or self.alpha == 0

    def integral(self) -> float:
        """Total mass of the kernel, g^{ij}."""
        return 0.0 if self.shape == KernelShape.ZERO else self.alpha

    def value(self, t):
        """Evaluate phi at lag(s) t; zero for negative lags."""
        t = np.asarray(t, dtype=float)
        if self.is_zero:
            return np.zeros_like(t)

        a, b, g = self.alpha, self.beta, self.gamma
        lag = np.maximum(t, 0.0)
        if self.shape == KernelShape.EXPONENTIAL:
            out = a * b * np.exp(-b * lag)
        elif self.shape == KernelShape.RECTANGULAR:
            out = np.where((t >= g) & (t <= g + 1.0 / b), a * b, 0.0)
        else:
            out = a * b * g * (1.0 + b * lag) ** (-(1.0 + g))
        return np.where(t < 0, 0.0, out)

    def sup_from(self, t):
        """sup over s >= t of phi(s), used as the thinning dominating value."""
        t = np.asarray(t, dtype=float)
        if self.is_zero:
            return np.zeros_like(t)
        if self.shape == KernelShape.RECTANGULAR:
            return np.where(t <= self.gamma + 1.0 / self.beta, self.alpha * self.beta, 0.0)
        # non-increasing shapes
        return self.value(np.maximum(t, 0.0))

    def tail_mass(self, t: float) -> float:
        """Mass of the kernel beyond lag t."""
        if self.is_zero:
            return 0.0
        a, b, g = self.alpha, self.beta, self.gamma
        t = max(float(t), 0.0)
        if self.shape == KernelShape.EXPONENTIAL:
            return a * math.exp(-b * t)
        if self.shape == KernelShape.RECTANGULAR:
            if t <= g:
                return a
            return a * max(0.0, 1.0 - b * (t - g))
        return a * (1.0 + b * t) ** (-g)

    def horizon(self, tol: float = 1e-8) -> float:
        """Lag after which less than tol * alpha of the mass remains."""
        if self.is_zero:
            return 0.0
        b, g = self.beta, self.gamma
        if self.shape == KernelShape.EXPONENTIAL:
            return -math.log(tol) / b
        if self.shape == KernelShape.RECTANGULAR:
            return g + 1.0 / b
        return (tol ** (-1.0 / g) - 1.0) / b

    def exponential_components(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Write the kernel as sum_m w_m * exp(-r_m * t).

        Exact for exponential kernels. Power laws use the Gamma-integral
        identity (1+x)^-(1+g) = Gamma(1+g)^-1 int u^g exp(-u(1+x)) du on a
        log-spaced grid, renormalized so that sum_m w_m / r_m == alpha.

        Returns:
            (weights, rates) arrays; both empty for zero and rectangular kernels.
        """
        if self.is_zero or self.shape == KernelShape.RECTANGULAR:
            return np.empty(0), np.empty(0)
        if self.shape == KernelShape.EXPONENTIAL:
            return np.array([self.alpha * self.beta]), np.array([self.beta])

        a, b, g = self.alpha, self.beta, self.gamma
        log_u = np.arange(math.log(MIXTURE_U_MIN), math.log(MIXTURE_U_MAX), MIXTURE_LOG_STEP)
        u = np.exp(log_u)
        coeffs = u ** (1.0 + g) * np.exp(-u) * MIXTURE_LOG_STEP / gamma_fn(1.0 + g)
        coeffs /= g * np.sum(coeffs / u)
        return a * b * g * coeffs, b * u

    def to_dict(self) -> Dict[str, Any]:
        return {
            "shape": self.shape.value,
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "KernelSpec":
        return cls(
            shape=KernelShape(data.get("shape", "zero")),
            alpha=data.get("alpha", 0.0),
            beta=data.get("beta", 1.0),
            gamma=data.get("gamma", 0.0),
        )
