"""Recovery metrics between a ground-truth matrix A and an estimate B."""

import numpy as np

from ..errors import DimensionTooSmall, ShapeMismatch

# |a| at or below this counts as a zero entry
ZERO_TOL = 1e-12


def _pair(A, B):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape != B.shape:
        raise ShapeMismatch(f"Shapes differ: {A.shape} vs {B.shape}")
    return A, B


def rel_err(A, B) -> float:
    """
    Mean over entries of |a - b| / |a| where a != 0, and |b| where a == 0.

    Args:
        A: ground truth
        B: estimate, same shape as A

    Returns:
        The averaged relative error, 0 when B == A.
    """
    A, B = _pair(A, B)
    zero = np.abs(A) <= ZERO_TOL
    safe = np.where(zero, 1.0, np.abs(A))
    terms = np.where(zero, np.abs(B), np.abs(A - B) / safe)
    return float(terms.mean())


def rank_corr(x, y) -> float:
    """
    Kendall tau-a of two vectors: sum over pairs of the sign products,
    times 2 / (n (n - 1)). Tied pairs count for neither side.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    n = x.size
    if y.size != n:
        raise ShapeMismatch(f"Lengths differ: {n} vs {y.size}")
    if n < 2:
        raise DimensionTooSmall(f"Rank correlation needs at least 2 entries, got {n}")
    # every unordered pair appears twice in the full sign grid
    s = np.sum(np.sign(x[:, None] - x[None, :]) * np.sign(y[:, None] - y[None, :]))
    return float(s / (n * (n - 1)))


def mean_rank_corr(A, B) -> float:
    """Row-averaged Kendall tau-a between A and B (square, d >= 2)."""
    A, B = _pair(A, B)
    d = A.shape[0]
    if A.shape[1] != d:
        raise ShapeMismatch(f"Rank correlation expects square matrices, got {A.shape}")
    if d < 2:
        raise DimensionTooSmall(f"Rank correlation needs d >= 2, got d = {d}")
    return float(np.mean([rank_corr(A[i], B[i]) for i in range(d)]))
