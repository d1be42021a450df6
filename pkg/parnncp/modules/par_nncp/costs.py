"""
Leading-order per-iteration costs of the distributed algorithm.

Constants are dropped; with I = prod I_n and P = prod P_n:

                        computation   communication      MTTKRP temp              replicas
    with dim. tree      I R / P       R sum I_n/P_n      R sqrt(I/P)              R sum I_n/P_n
    without             N I R / P     R sum I_n/P_n      max_n R (I/I_n)/(P/P_n)  R sum I_n/P_n
"""

import math
from typing import Sequence

from parnncp.models.grid import CostEstimate
from parnncp.modules.parallel.errors import GridError


def estimate_costs(dims: Sequence[int], grid_dims: Sequence[int], rank: int, dimtree: bool = True) -> CostEstimate:
    """
    Leading-order cost estimate for one outer iteration.

    Example:
        estimate_costs((64, 64, 64), (4, 4, 4), 8).communication_words  # 3 * 8 * 16 = 384
    """
    if len(dims) != len(grid_dims):
        raise GridError(f"grid {tuple(grid_dims)} does not match {len(dims)} tensor modes")
    total = math.prod(dims)
    procs = math.prod(grid_dims)
    ndims = len(dims)
    replica = rank * sum(i / p for i, p in zip(dims, grid_dims))

    if dimtree:
        computation = total * rank / procs
        temp = rank * math.sqrt(total / procs)
    else:
        computation = ndims * total * rank / procs
        temp = max(rank * (total / i) / (procs / p) for i, p in zip(dims, grid_dims))

    return CostEstimate(
        dims=list(dims),
        grid_dims=tuple(grid_dims),
        rank=rank,
        dimension_tree=dimtree,
        computation_flops=computation,
        communication_words=replica,
        memory_mttkrp_words=temp,
        memory_replica_words=replica,
    )
