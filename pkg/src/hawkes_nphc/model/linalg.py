"""
The G / R duality: R = (I - G)^-1 and its inverse map, plus the
spectral-radius gate used for stability checks.
"""

import numpy as np
import scipy.linalg
from loguru import logger

from ..errors import NonConvergence, ShapeMismatch, SingularMatrix, StabilityViolation

EPS_STAB = 1e-6
COND_WARN = 1e12


def _as_square(M, name: str = "matrix") -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeMismatch(f"{name} must be square, got shape {M.shape}")
    return M


def spectral_radius(M, max_iter: int = 10_000, tol: float = 1e-13,
                    fallback: bool = True) -> float:
    """
    Largest absolute eigenvalue of M.

    Power iteration from the all-ones vector. Non-negative matrices are
    shifted by I first (the Perron root moves by exactly one and periodic
    matrices become primitive). When the iteration does not settle, the
    dense eigenvalue solver is used unless fallback is False, in which
    case NonConvergence is raised.
    """
    M = _as_square(M)
    if not np.all(np.isfinite(M)):
        raise NonConvergence("Matrix has non-finite entries")
    d = M.shape[0]
    if not np.any(M):
        return 0.0

    shift = 1.0 if np.all(M >= 0) else 0.0
    A = M + shift * np.eye(d)
    x = np.ones(d) / np.sqrt(d)
    estimate = np.inf
    for _ in range(max_iter):
        y = A @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            # x fell into the null space
            break
        x = y / norm
        if abs(norm - estimate) <= tol * max(norm, 1.0):
            return max(norm - shift, 0.0)
        estimate = norm

    if not fallback:
        raise NonConvergence(f"Power iteration did not converge after {max_iter} iterations",
                             max_iter=max_iter)
    logger.debug("Power iteration did not settle, using dense eigenvalues (d={})", d)
    eigenvalues = scipy.linalg.eigvals(M)
    radius = float(np.max(np.abs(eigenvalues)))
    if not np.isfinite(radius):
        raise NonConvergence("Dense eigenvalue solver returned non-finite values")
    return radius


def _lu_inverse(A: np.ndarray, what: str) -> np.ndarray:
    """Invert A through LU with partial pivoting."""
    lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    diag = np.abs(np.diag(lu))
    if np.any(diag == 0.0) or np.any(diag < np.finfo(float).eps * np.max(diag) * A.shape[0]):
        raise SingularMatrix(f"{what} is numerically singular")
    return scipy.linalg.lu_solve((lu, piv), np.eye(A.shape[0]))


def condition_number(M) -> float:
    M = _as_square(M)
    return float(np.linalg.cond(M))


def g_to_r(G, eps_stab: float = EPS_STAB) -> np.ndarray:
    """R = (I - G)^-1 for a G whose spectral radius is below 1 - eps_stab."""
    G = _as_square(G, "G")
    d = G.shape[0]
    radius = spectral_radius(G)
    if radius >= 1.0 - eps_stab:
        raise StabilityViolation(
            f"Spectral radius {radius:.6g} is not below 1 - {eps_stab:g}",
            spectral_radius=radius,
        )

    I_minus_G = np.eye(d) - G
    R = _lu_inverse(I_minus_G, "I - G")
    residual = np.max(np.abs(R @ I_minus_G - np.eye(d)))
    if residual > 1e-10 * d:
        logger.warning("R (I - G) deviates from identity by {:.3g}", residual)
    return R


def r_to_g(R) -> np.ndarray:
    """G = I - R^-1."""
    R = _as_square(R, "R")
    if not np.all(np.isfinite(R)):
        raise SingularMatrix("R has non-finite entries")
    cond = condition_number(R)
    if not np.isfinite(cond):
        raise SingularMatrix("R is singular", condition_number=cond)
    if cond > COND_WARN:
        logger.warning("R is ill-conditioned (condition number {:.3g})", cond)
    return np.eye(R.shape[0]) - _lu_inverse(R, "R")
