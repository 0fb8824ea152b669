"""
Full-batch AdaGrad minimization of the cumulant matching loss, followed by
the R -> (G, mu) recovery.
"""

import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg
from loguru import logger

from ..cumulants import IntegratedCumulants
from ..errors import DegenerateCumulants, NonFiniteLoss, SingularMatrix, ValidationError
from ..model import condition_number, r_to_g
from .forward import compute_kappa, loss_and_gradient, psd_square_root


class AdagradOptimizer:
    """
    Per-coordinate adaptive step:

        acc <- acc + g^2
        x   <- x - stepsize * g / sqrt(acc + eps)
    """

    def __init__(self, stepsize: float = 0.1, eps: float = 1e-8):
        self.stepsize = stepsize
        self.eps = eps
        self.accumulation: Optional[np.ndarray] = None

    def apply_grad(self, grad: np.ndarray, x: np.ndarray) -> np.ndarray:
        if self.accumulation is None:
            self.accumulation = np.zeros_like(x)
        self.accumulation += grad * grad
        return x - self.stepsize * grad / np.sqrt(self.accumulation + self.eps)

    def reset(self):
        self.accumulation = None


@dataclass(frozen=True)
class SolveConfig:
    max_iters: int = 20_000
    learning_rate: float = 0.1
    adagrad_epsilon: float = 1e-8
    grad_tol: float = 1e-8
    kappa_override: Optional[float] = None
    # full-batch AdaGrad is deterministic; the seed is recorded in manifests only
    seed: int = 0
    trace_stride: int = 10

    def __post_init__(self):
        if self.max_iters < 0:
            raise ValidationError(f"max_iters must be >= 0, got {self.max_iters}")
        if not self.learning_rate > 0:
            raise ValidationError(f"learning_rate must be positive, got {self.learning_rate}")
        if not self.adagrad_epsilon > 0:
            raise ValidationError(f"adagrad_epsilon must be positive, got {self.adagrad_epsilon}")
        if self.grad_tol < 0:
            raise ValidationError(f"grad_tol must be >= 0, got {self.grad_tol}")
        if self.kappa_override is not None and not 0.0 <= self.kappa_override <= 1.0:
            raise ValidationError(f"kappa must lie in [0, 1], got {self.kappa_override}")
        if self.trace_stride < 1:
            raise ValidationError(f"trace_stride must be >= 1, got {self.trace_stride}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "max_iters": self.max_iters,
            "learning_rate": self.learning_rate,
            "adagrad_epsilon": self.adagrad_epsilon,
            "grad_tol": self.grad_tol,
            "kappa_override": self.kappa_override,
            "seed": self.seed,
            "trace_stride": self.trace_stride,
        }


@dataclass(eq=False)
class SolveResult:
    R_hat: np.ndarray
    G_hat: np.ndarray
    mu_hat: np.ndarray
    kappa: float
    loss_trace: List[Tuple[int, float]] = field(default_factory=list)
    final_grad_norm: float = float("nan")
    condition_number_R: float = float("nan")
    iterations_used: int = 0
    converged: bool = False
    clipped_eigenvalues: int = 0
    elapsed_seconds: float = 0.0

    @property
    def final_loss(self) -> float:
        return self.loss_trace[-1][1] if self.loss_trace else float("nan")

    def manifest(self) -> Dict[str, Any]:
        return {
            "kappa": self.kappa,
            "final_loss": self.final_loss,
            "final_grad_norm": self.final_grad_norm,
            "condition_number_R": self.condition_number_R,
            "iterations_used": self.iterations_used,
            "converged": self.converged,
            "clipped_eigenvalues": self.clipped_eigenvalues,
        }


def _recover_mu(R_hat: np.ndarray, Lambda: np.ndarray) -> np.ndarray:
    """mu = R^{-1} Lambda through an LU solve."""
    try:
        lu, piv = scipy.linalg.lu_factor(R_hat, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as e:
        raise SingularMatrix(f"Cannot factor R_hat: {e}")
    if np.any(np.abs(np.diag(lu)) == 0.0):
        raise SingularMatrix("R_hat is singular; mu cannot be recovered")
    return scipy.linalg.lu_solve((lu, piv), Lambda)


def solve(cum: IntegratedCumulants, cfg: Optional[SolveConfig] = None) -> SolveResult:
    """
    Minimize the matching loss from the spectral starting point.

    Stops when the gradient norm drops below grad_tol or after max_iters
    updates. The loss trace keeps every trace_stride-th iteration plus
    the first and the last.

    Raises:
        DegenerateCumulants: a mean intensity is zero, or C and Kc both vanish
        NonFiniteLoss: the iterate diverged; carries the iteration index
        SingularMatrix: the final R_hat cannot be inverted
    """
    cfg = cfg or SolveConfig()
    if np.any(cum.Lambda <= 0):
        raise DegenerateCumulants("Every mean intensity must be positive",
                                  zero_nodes=np.flatnonzero(cum.Lambda <= 0).tolist())
    kappa = cfg.kappa_override if cfg.kappa_override is not None else compute_kappa(cum.C, cum.Kc)

    root, clipped = psd_square_root(cum.C)
    if clipped:
        logger.warning("Clipped {} negative eigenvalue(s) of C-hat for the starting point", clipped)
    R = root / np.sqrt(cum.Lambda)[None, :]

    started = time.perf_counter()
    optimizer = AdagradOptimizer(cfg.learning_rate, cfg.adagrad_epsilon)
    trace: List[Tuple[int, float]] = []
    converged = False
    grad_norm = float("nan")
    iteration = 0
    for iteration in range(cfg.max_iters + 1):
        value, grad = loss_and_gradient(R, cum, kappa)
        grad_norm = float(np.linalg.norm(grad))
        if not (np.isfinite(value) and np.isfinite(grad_norm)):
            raise NonFiniteLoss(f"Loss became non-finite at iteration {iteration}", iteration)
        if iteration % cfg.trace_stride == 0:
            trace.append((iteration, value))
        if grad_norm < cfg.grad_tol:
            converged = True
            break
        if iteration == cfg.max_iters:
            break
        R = optimizer.apply_grad(grad, R)
        if iteration % 1000 == 0:
            logger.debug("iter {} loss={:.6g} |grad|={:.3g}", iteration, value, grad_norm)
    if not trace or trace[-1][0] != iteration:
        trace.append((iteration, value))

    G_hat = r_to_g(R)
    mu_hat = _recover_mu(R, cum.Lambda)
    elapsed = time.perf_counter() - started
    logger.info("Solver {} after {} iterations: loss={:.6g} |grad|={:.3g} ({:.1f}s)",
                "converged" if converged else "stopped", iteration, trace[-1][1], grad_norm,
                elapsed)
    return SolveResult(
        R_hat=R,
        G_hat=G_hat,
        mu_hat=mu_hat,
        kappa=kappa,
        loss_trace=trace,
        final_grad_norm=grad_norm,
        condition_number_R=condition_number(R),
        iterations_used=iteration,
        converged=converged,
        clipped_eigenvalues=clipped,
        elapsed_seconds=elapsed,
    )


def threshold_matrix(G: np.ndarray, threshold: float) -> np.ndarray:
    """Zero entries with |G_ij| below threshold."""
    if threshold < 0:
        raise ValidationError(f"threshold must be >= 0, got {threshold}")
    out = np.array(G, dtype=float, copy=True)
    out[np.abs(out) < threshold] = 0.0
    return out
