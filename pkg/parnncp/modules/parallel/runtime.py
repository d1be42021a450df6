"""
Worker contexts and grid spawning.

A WorkerContext is everything one virtual worker owns: its grid
coordinate, local tensor block, owned and gathered factor rows, replicated
Grams, and the request builders for the fabric. Workers share nothing
outside the fabric.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from parnncp.models.comm import CollectiveKind, CommCategory
from parnncp.modules.parallel.distribute import row_blocks, slab_range
from parnncp.modules.parallel.fabric import CollectiveRequest, Fabric
from parnncp.modules.parallel.grid import ProcessGrid
from parnncp.modules.tensor.dense import DenseTensor

logger = logging.getLogger(__name__)


class WorkerContext:
    """
    State of one virtual worker.

    Factor rows are tracked per mode n (1-indexed lists, slot n - 1):
    - slab_rows[n]: global row range of the slab this worker's slice shares
    - owned_rows[n]: global row range this worker updates
    - slabs[n] / owned[n]: the corresponding factor rows
    """

    def __init__(self, grid: ProcessGrid, rank: int):
        self.grid = grid
        self.rank = rank
        self.coord = grid.coord_of(rank)
        self.local: Optional[DenseTensor] = None
        self.slab_rows: List[Tuple[int, int]] = []
        self.owned_rows: List[Tuple[int, int]] = []
        self.owned_partitions: List[List[int]] = []
        self.slabs: List[Optional[np.ndarray]] = []
        self.owned: List[Optional[np.ndarray]] = []
        self.grams: List[Optional[np.ndarray]] = []
        self.iteration = 0
        self._calls: Dict[str, int] = {}

    def slice_group(self, n: int) -> str:
        return self.grid.slice_of(self.rank, n)

    def assign_rows(self, padded_extents: Sequence[int]) -> None:
        """Compute slab and owned row ranges for every mode."""
        self.slab_rows, self.owned_rows, self.owned_partitions = [], [], []
        for n, extent in enumerate(padded_extents, start=1):
            lo, hi = slab_range(extent, self.grid.dims[n - 1], self.coord[n - 1])
            members = self.grid.members(self.slice_group(n))
            blocks = row_blocks(hi - lo, len(members))
            mine = blocks[members.index(self.rank)]
            self.slab_rows.append((lo, hi))
            self.owned_rows.append((lo + mine[0], lo + mine[1]))
            self.owned_partitions.append([b - a for a, b in blocks])

    def owned_local_range(self, n: int) -> Tuple[int, int]:
        """Owned rows relative to the start of the slab."""
        lo = self.slab_rows[n - 1][0]
        a, b = self.owned_rows[n - 1]
        return a - lo, b - lo

    def _request(self, kind: CollectiveKind, payload: np.ndarray, subgroup: str,
                 category: CommCategory, partition: Optional[List[int]] = None) -> CollectiveRequest:
        call = self._calls.get(subgroup, 0)
        self._calls[subgroup] = call + 1
        return CollectiveRequest(
            kind=kind,
            subgroup=subgroup,
            call=call,
            payload=np.asarray(payload, dtype=np.float64),
            partition=partition,
            category=category,
            iteration=self.iteration,
        )

    def all_reduce(self, buffer: np.ndarray, subgroup: str, category: CommCategory) -> CollectiveRequest:
        return self._request(CollectiveKind.ALL_REDUCE, np.ravel(buffer), subgroup, category)

    def reduce_scatter(self, buffer: np.ndarray, subgroup: str, partition: List[int],
                       category: CommCategory) -> CollectiveRequest:
        return self._request(CollectiveKind.REDUCE_SCATTER, np.ravel(buffer), subgroup, category, partition)

    def all_gather(self, owned: np.ndarray, subgroup: str, partition: List[int],
                   category: CommCategory) -> CollectiveRequest:
        return self._request(CollectiveKind.ALL_GATHER, np.ravel(owned), subgroup, category, partition)

    def verify(self, buffer: np.ndarray, subgroup: str) -> CollectiveRequest:
        return self._request(CollectiveKind.VERIFY, buffer, subgroup, CommCategory.FACTOR)

    def __repr__(self):
        return f"<WorkerContext rank={self.rank} coord={self.coord}>"


def spawn_grid(grid_dims: Sequence[int], fabric: Optional[Fabric] = None) -> Tuple[List[WorkerContext], Fabric]:
    """
    Create one context per grid position plus the fabric connecting them.

    Subgroups exist for every worker set ("all") and every mode-n slice.

    Raises:
        GridError: On a zero or negative extent

    Example:
        workers, fabric = spawn_grid((4, 2))
        len(workers)                               # 8
        len(fabric.grid.members("slice1:1"))       # 2
    """
    grid = grid_dims if isinstance(grid_dims, ProcessGrid) else ProcessGrid(grid_dims)
    fabric = fabric or Fabric(grid)
    workers = [WorkerContext(grid, rank) for rank in range(grid.size)]
    logger.debug(f"Spawned grid {grid.label}", extra={"workers": grid.size})
    return workers, fabric
