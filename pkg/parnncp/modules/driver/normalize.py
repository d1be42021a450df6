"""Column normalization into the weight vector lambda."""

import logging
from typing import Tuple

import numpy as np

from parnncp.core.config import settings

logger = logging.getLogger(__name__)


def column_sq_norms(H: np.ndarray) -> np.ndarray:
    """Squared 2-norm of every column (local part when H holds a row block)."""
    return (H * H).sum(axis=0)


def guard_dead_columns(H: np.ndarray, sq_norms: np.ndarray, real_rows: int, global_rows: int) -> np.ndarray:
    """
    Reset columns whose global squared norm is zero to the guard value.

    Only the first real_rows rows of the (local) block are real; padded rows
    stay zero. The guarded norm is known in closed form, so no extra
    reduction is needed.

    Args:
        H: Local rows, updated in place
        sq_norms: Global squared column norms
        real_rows: Number of leading rows of H that are not padding
        global_rows: Real rows of the whole factor (I_n)

    Returns:
        Squared norms with guarded columns replaced
    """
    dead = sq_norms == 0.0
    if not dead.any():
        return sq_norms
    guard = settings.ZERO_COLUMN_GUARD
    H[:real_rows, dead] = guard
    fixed = sq_norms.copy()
    fixed[dead] = guard * guard * global_rows
    logger.warning(
        f"{int(dead.sum())} factor columns collapsed to zero, reset to guard",
        extra={"columns": np.flatnonzero(dead).tolist()},
    )
    return fixed


def finish_normalization(H: np.ndarray, sq_norms: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Scale columns by the given global norms; returns (H / lambda, lambda)."""
    lam = np.sqrt(sq_norms)
    return np.ascontiguousarray(H / lam), lam


def normalize_columns(H: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Unit 2-norm columns plus their norms.

    All-zero columns become the guard value first, so the reported norm is
    the guard column's tiny norm.

    Example:
        normalize_columns(np.array([[3.0], [4.0]]))  # ([[0.6], [0.8]], [5.0])
    """
    H = np.array(H, dtype=np.float64)
    rows = H.shape[0]
    sq = guard_dead_columns(H, column_sq_norms(H), rows, rows)
    return finish_normalization(H, sq)
