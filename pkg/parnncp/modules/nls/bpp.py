"""
Block principal pivoting for many-right-hand-side NNLS.

Each row h of the result solves

    min_{h >= 0}  1/2 h^T S h - m^T h

(the normal-equation form of min ||X h - y||). Starting from the empty
passive set, infeasible variables are exchanged between the passive and
active sets until the KKT conditions hold:

    h >= 0,  g = S h - m,  g_passive = 0,  g_active >= 0.

Exchange rule per row:
- the number of infeasible variables dropped below its best so far:
  exchange all of them and refill the backup budget (3)
- otherwise, while the budget lasts: exchange the lowest-index half
- budget exhausted: exchange only the lowest-index infeasible variable

Rows sharing a passive set are solved together with one factorization.
"""

import logging
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from parnncp.core.config import settings
from parnncp.modules.nls.errors import NlsConvergenceError

logger = logging.getLogger(__name__)

BACKUP_BUDGET = 3


class BppSolution(BaseModel):
    """Solution block plus diagnostics."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    H: np.ndarray = Field(..., description="k x R nonnegative solution")
    flagged_rows: List[int] = Field(default_factory=list, description="Rows solved through a singular passive system")
    iterations: int = Field(0, description="Exchange rounds performed")


def _solve_passive(S: np.ndarray, M: np.ndarray, passive: np.ndarray):
    """
    Solve S_FF x_F = m_F for a block of rows sharing passive set F.

    Returns:
        (X block with zeros outside F, True if the system was singular)
    """
    X = np.zeros_like(M)
    if not passive.any():
        return X, False
    S_ff = S[np.ix_(passive, passive)]
    rhs = M[:, passive].T
    try:
        X[:, passive] = np.linalg.solve(S_ff, rhs).T
        return X, False
    except np.linalg.LinAlgError:
        X[:, passive] = np.linalg.lstsq(S_ff, rhs, rcond=None)[0].T
        return X, True


def solve_bpp(S: np.ndarray, M: np.ndarray, guard_zero_columns: bool = True) -> BppSolution:
    """
    Solve the row-wise NNLS problems exactly with block principal pivoting.

    Args:
        S: R x R symmetric positive semidefinite matrix
        M: k x R right-hand sides, one row per subproblem
        guard_zero_columns: Replace all-zero result columns by the guard value

    Returns:
        BppSolution with the k x R result

    Raises:
        NlsConvergenceError: If rows are still infeasible after the exchange budget
    """
    S = np.asarray(S, dtype=np.float64)
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    rows, rank = M.shape
    tol = settings.KKT_ZERO_TOL
    max_iter = settings.bpp_iteration_limit(rank)

    X = np.zeros((rows, rank))
    Y = -M.copy()
    passive = np.zeros((rows, rank), dtype=bool)
    best = np.full(rows, rank + 1)
    budget = np.full(rows, BACKUP_BUDGET)
    singular = np.zeros(rows, dtype=bool)

    iterations = 0
    while True:
        infeasible = (passive & (X < -tol)) | (~passive & (Y < -tol))
        counts = infeasible.sum(axis=1)
        todo = np.flatnonzero(counts > 0)
        if todo.size == 0:
            break
        if iterations >= max_iter:
            logger.error(
                f"BPP did not converge for {todo.size} rows",
                extra={"rows": todo.size, "iterations": iterations},
            )
            raise NlsConvergenceError(
                f"BPP exceeded {max_iter} exchange rounds with {todo.size} infeasible rows",
                rows=todo.tolist(),
                infeasible=counts[todo].tolist(),
                iterations=iterations,
            )
        iterations += 1

        for i in todo:
            candidates = np.flatnonzero(infeasible[i])
            if counts[i] < best[i]:
                best[i] = counts[i]
                budget[i] = BACKUP_BUDGET
                exchange = candidates
            elif budget[i] > 0:
                budget[i] -= 1
                exchange = candidates[: (candidates.size + 1) // 2]
            else:
                exchange = candidates[:1]
            passive[i, exchange] = ~passive[i, exchange]

        # Solve rows with identical passive sets together
        patterns, group_of = np.unique(passive[todo], axis=0, return_inverse=True)
        for g, pattern in enumerate(patterns):
            members = todo[np.flatnonzero(group_of.reshape(-1) == g)]
            X_block, was_singular = _solve_passive(S, M[members], pattern)
            X[members] = X_block
            if was_singular:
                singular[members] = True
            Y_block = X_block @ S - M[members]
            Y_block[:, pattern] = 0.0
            Y[members] = Y_block

    H = np.ascontiguousarray(np.maximum(X, 0.0))
    flagged = np.flatnonzero(singular).tolist()
    if flagged:
        logger.warning(
            f"BPP used a minimum-norm solve on {len(flagged)} rows",
            extra={"flagged_rows": len(flagged)},
        )

    if guard_zero_columns and rows:
        dead = ~H.any(axis=0)
        if dead.any():
            H[:, dead] = settings.ZERO_COLUMN_GUARD
            logger.warning("BPP result had zero columns, reset to guard", extra={"columns": np.flatnonzero(dead).tolist()})

    return BppSolution(H=H, flagged_rows=flagged, iterations=iterations)


def nnls_bpp(S: np.ndarray, M: np.ndarray, guard_zero_columns: bool = True) -> np.ndarray:
    """
    k x R nonnegative solution of the row-wise problems (see solve_bpp).

    Example:
        nnls_bpp(np.array([[4.0, 2.0], [2.0, 3.0]]), np.array([[2.0, 5.0]]))  # [[0, 5/3]]
    """
    return solve_bpp(S, M, guard_zero_columns=guard_zero_columns).H
