"""Virtual distributed runtime: grid, distribution, collectives and accounting."""

from parnncp.models.comm import CommLedger, CostModel, predicted_time
from parnncp.modules.parallel.collectives import all_gather, all_reduce, reduce_scatter
from parnncp.modules.parallel.distribute import distribute_tensor, gather_tensor
from parnncp.modules.parallel.errors import CollectiveError, DistributionError, GridError, ReplicationError
from parnncp.modules.parallel.fabric import Fabric
from parnncp.modules.parallel.grid import ALL_PROCS, ProcessGrid, slice_id
from parnncp.modules.parallel.runtime import WorkerContext, spawn_grid

__all__ = [
    "ALL_PROCS",
    "CollectiveError",
    "CommLedger",
    "CostModel",
    "DistributionError",
    "Fabric",
    "GridError",
    "ProcessGrid",
    "ReplicationError",
    "WorkerContext",
    "all_gather",
    "all_reduce",
    "distribute_tensor",
    "gather_tensor",
    "predicted_time",
    "reduce_scatter",
    "slice_id",
    "spawn_grid",
]
