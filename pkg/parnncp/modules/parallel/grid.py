"""
Logical N-dimensional processor grid.

Coordinates are 1-indexed; rank <-> coordinate is generalized column-major
(coordinate 1 varies fastest), the same convention as tensor entries.

Subgroups:
- "all": every worker
- "slice{n}:{c}": the workers whose n-th coordinate is c (mode-n slice)
"""

import math
from typing import Dict, List, Sequence, Set, Tuple

from parnncp.modules.parallel.errors import GridError

ALL_PROCS = "all"


def slice_id(n: int, c: int) -> str:
    return f"slice{n}:{c}"


class ProcessGrid:
    """
    P_1 x ... x P_N grid of virtual workers.

    Usage:
        grid = ProcessGrid((3, 3, 3))
        grid.rank_of((1, 3, 1))      # 6
        grid.members(slice_id(2, 3))  # the 9 ranks with p_2 = 3
    """

    def __init__(self, dims: Sequence[int]):
        dims = tuple(int(p) for p in dims)
        if not dims:
            raise GridError("a processor grid needs at least one mode")
        if any(p < 1 for p in dims):
            raise GridError(f"every grid extent must be >= 1, got {dims}")
        self.dims = dims
        self.size = math.prod(dims)
        self._members: Dict[str, List[int]] = {ALL_PROCS: list(range(self.size))}
        for rank in range(self.size):
            for n, c in enumerate(self.coord_of(rank), start=1):
                self._members.setdefault(slice_id(n, c), []).append(rank)

    @classmethod
    def parse(cls, text: str) -> "ProcessGrid":
        """Grid from 'PxQxR'."""
        try:
            dims = [int(part) for part in text.lower().split("x")]
        except ValueError:
            raise GridError(f"invalid grid {text!r}, expected e.g. 2x2x2")
        return cls(dims)

    @property
    def ndims(self) -> int:
        return len(self.dims)

    @property
    def label(self) -> str:
        return "x".join(map(str, self.dims))

    def coord_of(self, rank: int) -> Tuple[int, ...]:
        if not 0 <= rank < self.size:
            raise GridError(f"rank {rank} out of range 0..{self.size - 1}")
        coord = []
        for p in self.dims:
            coord.append(rank % p + 1)
            rank //= p
        return tuple(coord)

    def rank_of(self, coord: Sequence[int]) -> int:
        if len(coord) != self.ndims:
            raise GridError(f"coordinate {tuple(coord)} has {len(coord)} modes, grid has {self.ndims}")
        rank, stride = 0, 1
        for n, (c, p) in enumerate(zip(coord, self.dims), start=1):
            if not 1 <= c <= p:
                raise GridError(f"coordinate {c} out of range 1..{p} in mode {n}")
            rank += (c - 1) * stride
            stride *= p
        return rank

    def members(self, subgroup: str) -> List[int]:
        """Ranks of a subgroup in ascending order (their slice ranks)."""
        if subgroup not in self._members:
            raise GridError(f"unknown subgroup {subgroup!r}")
        return self._members[subgroup]

    def slice_of(self, rank: int, n: int) -> str:
        return slice_id(n, self.coord_of(rank)[n - 1])

    def groups_of(self, rank: int) -> Set[str]:
        """Every subgroup the worker belongs to."""
        return {ALL_PROCS} | {self.slice_of(rank, n) for n in range(1, self.ndims + 1)}

    def subgroups(self) -> List[str]:
        return list(self._members)

    def __repr__(self):
        return f"<ProcessGrid {self.label}>"
