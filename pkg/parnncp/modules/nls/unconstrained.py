"""Unconstrained least squares on the normal equations (reference path)."""

import numpy as np

from parnncp.modules.nls.errors import SingularSystemError

# Condition number above which S is treated as singular
MAX_CONDITION = 1.0 / np.finfo(np.float64).eps


def ls_unconstrained(S: np.ndarray, M: np.ndarray) -> np.ndarray:
    """
    H = M S^-1: every row solves S h^T = m^T.

    Raises:
        SingularSystemError: If S is singular or numerically so
    """
    S = np.asarray(S, dtype=np.float64)
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    if not np.isfinite(S).all() or np.linalg.cond(S) > MAX_CONDITION:
        raise SingularSystemError("S is singular; the unconstrained solve is undefined")
    try:
        return np.ascontiguousarray(np.linalg.solve(S, M.T).T)
    except np.linalg.LinAlgError as e:
        raise SingularSystemError(f"S is singular: {e}") from e
