"""
Block (Cartesian) distribution of tensors and factor rows over a grid.

Worker p owns the hyper-rectangle whose mode-n index range is
((p_n - 1) I_n / P_n, p_n I_n / P_n]. When P_n does not divide I_n the
tensor may be zero-padded to the next multiple; padded indices are always
at the end of a mode.

Factor rows: the I_n / P_n rows of slab p_n are replicated over the mode-n
slice, and each slice member owns one contiguous block of them.
"""

import logging
from typing import List, Sequence, Tuple

import numpy as np

from parnncp.modules.parallel.errors import DistributionError, GridError
from parnncp.modules.parallel.grid import ProcessGrid
from parnncp.modules.tensor.dense import DenseTensor

logger = logging.getLogger(__name__)


def padded_dims(dims: Sequence[int], grid: ProcessGrid, pad: bool = False) -> Tuple[int, ...]:
    """
    Extents rounded up to multiples of the grid.

    Raises:
        GridError: If the grid has a different number of modes
        DistributionError: If an extent is not divisible and padding is off
    """
    if len(dims) != grid.ndims:
        raise GridError(f"grid {grid.label} has {grid.ndims} modes, tensor has {len(dims)}")
    out = []
    for n, (d, p) in enumerate(zip(dims, grid.dims), start=1):
        if d % p:
            if not pad:
                raise DistributionError(f"mode {n}: extent {d} is not divisible by {p} (enable padding)")
            d = -(-d // p) * p
        out.append(int(d))
    return tuple(out)


def slab_range(padded_extent: int, parts: int, coord: int) -> Tuple[int, int]:
    """Half-open 0-indexed row range of slab `coord` (1-indexed)."""
    block = padded_extent // parts
    return (coord - 1) * block, coord * block


def row_blocks(rows: int, parts: int) -> List[Tuple[int, int]]:
    """Split rows into `parts` contiguous near-equal blocks; the first blocks get the extra rows."""
    base, extra = divmod(rows, parts)
    blocks, start = [], 0
    for i in range(parts):
        size = base + (1 if i < extra else 0)
        blocks.append((start, start + size))
        start += size
    return blocks


def distribute_tensor(tensor: DenseTensor, grid: ProcessGrid, pad: bool = False) -> List[DenseTensor]:
    """
    Local blocks indexed by worker rank.

    Example:
        blocks = distribute_tensor(DenseTensor.from_array(np.arange(16.).reshape(4, 4)), ProcessGrid((2, 2)))
        # four 2 x 2 blocks
    """
    full_dims = padded_dims(tensor.dims, grid, pad)
    array = tensor.to_array()
    if full_dims != tensor.dims:
        logger.warning(
            f"Padding tensor {tensor.dims} -> {full_dims} for grid {grid.label}",
            extra={"dims": list(tensor.dims), "padded": list(full_dims)},
        )
        padded = np.zeros(full_dims, order="F")
        padded[tuple(slice(0, d) for d in tensor.dims)] = array
        array = padded

    blocks = []
    for rank in range(grid.size):
        coord = grid.coord_of(rank)
        index = tuple(
            slice(*slab_range(d, p, c)) for d, p, c in zip(full_dims, grid.dims, coord)
        )
        blocks.append(DenseTensor.from_array(array[index]))
    return blocks


def gather_tensor(blocks: Sequence[DenseTensor], grid: ProcessGrid, dims: Sequence[int]) -> DenseTensor:
    """Reassemble local blocks (inverse of distribute_tensor, padding stripped)."""
    if len(blocks) != grid.size:
        raise DistributionError(f"{len(blocks)} blocks for {grid.size} workers")
    full_dims = tuple(b * p for b, p in zip(blocks[0].dims, grid.dims))
    array = np.zeros(full_dims, order="F")
    for rank, block in enumerate(blocks):
        coord = grid.coord_of(rank)
        index = tuple(slice(*slab_range(d, p, c)) for d, p, c in zip(full_dims, grid.dims, coord))
        array[index] = block.to_array()
    return DenseTensor.from_array(array[tuple(slice(0, d) for d in dims)])
