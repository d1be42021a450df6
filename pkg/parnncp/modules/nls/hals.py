"""
HALS column update.

One cycle r = 1..R of

    H(:, r) <- [H(:, r) + M(:, r) - (H S)(:, r)]_+

applied in place with the freshest H. The rule as written is an exact
coordinate minimizer only when diag(S) = 1, so callers keep the other
factors' columns unit-normalized.
"""

import logging

import numpy as np

from parnncp.core.config import settings

logger = logging.getLogger(__name__)


def hals_update(
    H: np.ndarray,
    M: np.ndarray,
    S: np.ndarray,
    guard_zero_columns: bool = True,
) -> np.ndarray:
    """
    One HALS cycle over the columns of H, in place.

    Args:
        H: k x R current factor rows (float64, updated in place)
        M: k x R MTTKRP rows
        S: R x R Hadamard product of the other Grams, unit diagonal
        guard_zero_columns: Replace a column that ends all-zero by the guard value

    Returns:
        H (the same array)

    Example:
        H = np.array([[1.0], [1.0]])
        hals_update(H, np.array([[0.5], [2.0]]), np.array([[1.0]]))  # [[0.5], [2.0]]
    """
    rank = H.shape[1]
    for r in range(rank):
        column = H[:, r] + M[:, r] - H @ S[:, r]
        H[:, r] = np.maximum(column, 0.0)
        if guard_zero_columns and H.shape[0] and not H[:, r].any():
            H[:, r] = settings.ZERO_COLUMN_GUARD
            logger.warning(f"HALS column {r} collapsed to zero, reset to guard", extra={"column": r})
    return H
