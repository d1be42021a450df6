"""
Collective operations over the buffers of one subgroup.

Each function takes one buffer per member, in ascending slice-rank order,
and returns what every member holds afterwards. Sums use a fixed pairwise
tree over that order, so results never depend on scheduling and
reduce_scatter followed by all_gather reproduces all_reduce bitwise.
"""

from typing import List, Sequence

import numpy as np

from parnncp.modules.parallel.errors import CollectiveError


def _as_buffers(buffers: Sequence[np.ndarray]) -> List[np.ndarray]:
    if len(buffers) == 0:
        raise CollectiveError("a collective needs at least one member")
    out = [np.asarray(b, dtype=np.float64).reshape(-1) for b in buffers]
    lengths = {b.size for b in out}
    if len(lengths) != 1:
        raise CollectiveError(f"buffer lengths differ across the group: {[b.size for b in out]}")
    return out


def tree_sum(buffers: Sequence[np.ndarray]) -> np.ndarray:
    """Elementwise sum, pairing neighbours level by level: ((b0+b1)+(b2+b3))+..."""
    level = list(buffers)
    while len(level) > 1:
        paired = [level[i] + level[i + 1] for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            paired.append(level[-1])
        level = paired
    return np.array(level[0], copy=True)


def partition_offsets(partition: Sequence[int], total: int, members: int) -> List[int]:
    """
    Offsets of a contiguous partition given as per-member sizes.

    Raises:
        CollectiveError: If the sizes are not a cover of 0..total
    """
    sizes = [int(s) for s in partition]
    if len(sizes) != members:
        raise CollectiveError(f"partition has {len(sizes)} parts for {members} members")
    if any(s < 0 for s in sizes) or sum(sizes) != total:
        raise CollectiveError(f"partition {sizes} does not cover {total} words")
    offsets = [0]
    for s in sizes:
        offsets.append(offsets[-1] + s)
    return offsets


def all_reduce(buffers: Sequence[np.ndarray]) -> List[np.ndarray]:
    """
    Every member receives the elementwise sum.

    Example:
        all_reduce([np.array([1.0, 2.0])] * 4)  # four copies of [4, 8]
    """
    bufs = _as_buffers(buffers)
    total = tree_sum(bufs)
    return [total.copy() for _ in bufs]


def reduce_scatter(buffers: Sequence[np.ndarray], partition: Sequence[int]) -> List[np.ndarray]:
    """
    Member i receives the sum restricted to its part of the partition.

    Example:
        reduce_scatter([np.array([1., 2., 3., 4.]), np.array([10., 20., 30., 40.])], [2, 2])
        # [[11, 22], [33, 44]]
    """
    bufs = _as_buffers(buffers)
    offsets = partition_offsets(partition, bufs[0].size, len(bufs))
    total = tree_sum(bufs)
    return [total[offsets[i]:offsets[i + 1]].copy() for i in range(len(bufs))]


def all_gather(slices: Sequence[np.ndarray], partition: Sequence[int]) -> List[np.ndarray]:
    """
    Every member receives the concatenation of all slices in member order.

    Raises:
        CollectiveError: If a slice does not match its part of the partition
    """
    if len(slices) == 0:
        raise CollectiveError("a collective needs at least one member")
    parts = [np.asarray(s, dtype=np.float64).reshape(-1) for s in slices]
    sizes = [int(s) for s in partition]
    partition_offsets(sizes, sum(sizes), len(parts))
    if [p.size for p in parts] != sizes:
        raise CollectiveError(f"slice sizes {[p.size for p in parts]} do not match partition {sizes}")
    full = np.concatenate(parts) if parts else np.empty(0)
    return [full.copy() for _ in parts]


def verify_identical(buffers: Sequence[np.ndarray]) -> bool:
    """Whether every member holds bitwise-identical data."""
    first = np.ascontiguousarray(buffers[0])
    return all(
        np.shape(b) == first.shape and np.ascontiguousarray(b).tobytes() == first.tobytes()
        for b in buffers[1:]
    )
