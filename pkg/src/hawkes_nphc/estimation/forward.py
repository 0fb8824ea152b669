"""
Forward cumulant maps R -> (C, Kc), the weighted matching loss and its
analytic gradient.

With L = diag(Lambda):

    C(R)  = R L R^T
    Kc(R) = (R o R) C^T + 2 [R o (C - R L)] R^T        (o: entrywise product)
    loss  = (1 - kappa) ||Kc(R) - Kc_hat||_F^2 + kappa ||C(R) - C_hat||_F^2

where the loss plugs C_hat into Kc(R), so it is a degree-6 polynomial in R.
"""

from typing import Optional, Tuple

import numpy as np

from ..cumulants import IntegratedCumulants
from ..errors import DegenerateCumulants, ShapeMismatch, ValidationError
from ..model import HawkesModel, g_to_r


def _check_shapes(R: np.ndarray, Lambda: np.ndarray, C: Optional[np.ndarray] = None):
    d = Lambda.size
    if R.shape != (d, d):
        raise ShapeMismatch(f"R has shape {R.shape}, expected {(d, d)}")
    if C is not None and C.shape != (d, d):
        raise ShapeMismatch(f"C has shape {C.shape}, expected {(d, d)}")


def forward_covariance(R, Lambda) -> np.ndarray:
    """C(R) = R diag(Lambda) R^T."""
    R = np.atleast_2d(np.asarray(R, dtype=float))
    Lambda = np.atleast_1d(np.asarray(Lambda, dtype=float))
    _check_shapes(R, Lambda)
    return (R * Lambda[None, :]) @ R.T


def forward_skewness_contracted(R, C, Lambda) -> np.ndarray:
    """Kc(R) = (R o R) C^T + 2 [R o (C - R L)] R^T, i.e. K^{iij}."""
    R = np.atleast_2d(np.asarray(R, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    Lambda = np.atleast_1d(np.asarray(Lambda, dtype=float))
    _check_shapes(R, Lambda, C)
    RL = R * Lambda[None, :]
    return (R * R) @ C.T + 2.0 * (R * (C - RL)) @ R.T


def skewness_tensor(R, C, Lambda) -> np.ndarray:
    """
    Full third cumulant
    K^{ijk} = sum_m R^{im}R^{jm}C^{km} + R^{im}C^{jm}R^{km} + C^{im}R^{jm}R^{km}
              - 2 Lambda^m R^{im}R^{jm}R^{km}.
    """
    R = np.atleast_2d(np.asarray(R, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    Lambda = np.atleast_1d(np.asarray(Lambda, dtype=float))
    _check_shapes(R, Lambda, C)
    return (np.einsum("im,jm,km->ijk", R, R, C)
            + np.einsum("im,jm,km->ijk", R, C, R)
            + np.einsum("im,jm,km->ijk", C, R, R)
            - 2.0 * np.einsum("m,im,jm,km->ijk", Lambda, R, R, R))


def theoretical_cumulants(model: HawkesModel) -> IntegratedCumulants:
    """Exact Lambda, C and Kc of a stable model."""
    R = g_to_r(model.integral_matrix())
    Lambda = R @ model.mu
    C = forward_covariance(R, Lambda)
    Kc = forward_skewness_contracted(R, C, Lambda)
    return IntegratedCumulants(Lambda=Lambda, C=C, Kc=Kc)


def compute_kappa(C_hat, Kc_hat) -> float:
    """kappa = ||Kc||^2 / (||Kc||^2 + ||C||^2)."""
    k2 = float(np.sum(np.asarray(Kc_hat, dtype=float) ** 2))
    c2 = float(np.sum(np.asarray(C_hat, dtype=float) ** 2))
    if k2 + c2 == 0.0:
        raise DegenerateCumulants("Both C and Kc are zero; kappa is undefined")
    return k2 / (k2 + c2)


def loss_and_gradient(R, cum: IntegratedCumulants, kappa: float,
                      with_gradient: bool = True) -> Tuple[float, Optional[np.ndarray]]:
    """Loss value and (optionally) its gradient with respect to R."""
    if not 0.0 <= kappa <= 1.0:
        raise ValidationError(f"kappa must lie in [0, 1], got {kappa}")
    R = np.atleast_2d(np.asarray(R, dtype=float))
    L = cum.Lambda
    C_hat = cum.C
    _check_shapes(R, L, C_hat)

    RL = R * L[None, :]
    E_C = RL @ R.T - C_hat
    M = R * (C_hat - RL)
    E_K = (R * R) @ C_hat.T + 2.0 * M @ R.T - cum.Kc
    value = (1.0 - kappa) * float(np.sum(E_K ** 2)) + kappa * float(np.sum(E_C ** 2))
    if not with_gradient:
        return value, None

    ER = E_K @ R
    grad_K = 4.0 * (R * (E_K @ C_hat) + (C_hat - RL) * ER - (R * ER) * L[None, :] + E_K.T @ M)
    grad_C = 2.0 * (E_C + E_C.T) @ RL
    return value, (1.0 - kappa) * grad_K + kappa * grad_C


def loss(R, cum: IntegratedCumulants, kappa: float) -> float:
    return loss_and_gradient(R, cum, kappa, with_gradient=False)[0]


def loss_gradient(R, cum: IntegratedCumulants, kappa: float) -> np.ndarray:
    return loss_and_gradient(R, cum, kappa)[1]


def psd_square_root(C) -> Tuple[np.ndarray, int]:
    """Square root of C projected on the PSD cone, plus the number of clipped eigenvalues."""
    C = np.atleast_2d(np.asarray(C, dtype=float))
    eigenvalues, vectors = np.linalg.eigh(0.5 * (C + C.T))
    clipped = int(np.sum(eigenvalues < 0))
    root = np.sqrt(np.clip(eigenvalues, 0.0, None))
    return (vectors * root[None, :]) @ vectors.T, clipped


def initial_point(cum: IntegratedCumulants) -> np.ndarray:
    """R0 = C_psd^{1/2} diag(Lambda)^{-1/2}, the O = I spectral starting point."""
    if np.any(cum.Lambda <= 0):
        raise DegenerateCumulants("Every mean intensity must be positive to build R0",
                                  zero_nodes=np.flatnonzero(cum.Lambda <= 0).tolist())
    root, _ = psd_square_root(cum.C)
    return root / np.sqrt(cum.Lambda)[None, :]
