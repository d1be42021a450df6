"""
Per-mode update steps shared by the sequential and the parallel driver.

Both drivers call exactly these functions on identically laid-out arrays,
which keeps a 1 x ... x 1 grid run bitwise equal to a sequential run.
"""

from typing import List, Optional, Sequence

import numpy as np

from parnncp.models.config import NlsMethod
from parnncp.modules.driver.errors import NonFiniteIterateError
from parnncp.modules.driver.normalize import column_sq_norms
from parnncp.modules.nls.bpp import nnls_bpp
from parnncp.modules.nls.hals import hals_update
from parnncp.modules.tensor.kruskal import KruskalModel


def nls_step(method: NlsMethod, H_current: np.ndarray, M: np.ndarray, S: np.ndarray) -> np.ndarray:
    """
    Unnormalized update H_hat of the given rows; the guard is left to the caller.

    H_current is the current iterate of the block, i.e. the unit-column
    factor scaled by the lambda of the most recently updated mode. HALS
    starts its column sweep from it; BPP ignores it.
    """
    if method == NlsMethod.BPP:
        return nnls_bpp(S, M, guard_zero_columns=False)
    return hals_update(np.array(H_current, dtype=np.float64), M, S, guard_zero_columns=False)


def check_finite(values: np.ndarray, phase: str, mode: Optional[int], iteration: int) -> None:
    if not np.isfinite(values).all():
        raise NonFiniteIterateError(phase, mode, iteration)


def initial_factors(
    dims: Sequence[int],
    rank: int,
    seed: int,
    init: Optional[KruskalModel] = None,
) -> List[np.ndarray]:
    """
    Global starting factors, column-normalized from mode 2 on.

    Modes 2..N are uniform [0, 1) draws from default_rng(seed), in mode
    order, unless an initial model is given. Mode 1 is only a starting point
    for HALS: zeros, or lambda-scaled init factor.
    """
    if init is not None:
        if tuple(init.dims) != tuple(dims) or init.rank != rank:
            raise ValueError(f"initial model {init!r} does not match dims {tuple(dims)} and rank {rank}")
        draws = [np.array(f) for f in init.factors[1:]]
        first = np.ascontiguousarray(init.factors[0] * init.weights)
    else:
        rng = np.random.default_rng(seed)
        draws = [rng.random((d, rank)) for d in dims[1:]]
        first = np.zeros((dims[0], rank))

    factors = [first]
    for H in draws:
        norms = np.sqrt(column_sq_norms(H))
        norms[norms == 0.0] = 1.0
        factors.append(np.ascontiguousarray(H / norms))
    return factors
