"""
Processor-grid choice.

The per-iteration factor communication and the replicated factor memory
both scale with sum_n I_n / P_n, so the best grid makes local blocks as
cubical as possible. P is small enough in practice to enumerate every
ordered factorization.
"""

import logging
from fractions import Fraction
from typing import Iterator, List, Sequence, Tuple

from parnncp.models.grid import GridChoice
from parnncp.modules.parallel.errors import GridError

logger = logging.getLogger(__name__)


def _divisors(p: int) -> List[int]:
    return [d for d in range(1, p + 1) if p % d == 0]


def enumerate_grids(procs: int, ndims: int) -> Iterator[Tuple[int, ...]]:
    """
    Every ordered factorization of procs into ndims factors, in lexicographic order.

    Example:
        list(enumerate_grids(4, 2))  # [(1, 4), (2, 2), (4, 1)]
    """
    if procs < 1:
        raise GridError(f"processor count must be >= 1, got {procs}")
    if ndims < 1:
        raise GridError(f"grid needs at least one mode, got {ndims}")
    if ndims == 1:
        yield (procs,)
        return
    for d in _divisors(procs):
        for rest in enumerate_grids(procs // d, ndims - 1):
            yield (d,) + rest


def grid_objective(dims: Sequence[int], grid_dims: Sequence[int]) -> Fraction:
    """sum_n I_n / P_n, exact."""
    return sum((Fraction(i, p) for i, p in zip(dims, grid_dims)), Fraction(0))


def grid_table(dims: Sequence[int], procs: int, rank: int = 1) -> List[GridChoice]:
    """All factorizations with objectives; the minimizer (ties: lexicographically smallest) is marked."""
    choices = []
    best_index, best_value = 0, None
    for index, grid_dims in enumerate(enumerate_grids(procs, len(dims))):
        value = grid_objective(dims, grid_dims)
        if best_value is None or value < best_value:
            best_index, best_value = index, value
        choices.append(GridChoice(
            grid_dims=grid_dims,
            objective=float(value),
            comm_words=float(value * rank),
        ))
    choices[best_index] = choices[best_index].model_copy(update={"optimal": True})
    return choices


def optimize_grid(dims: Sequence[int], procs: int, rank: int = 1) -> GridChoice:
    """
    Grid minimizing sum_n I_n / P_n among all factorizations of procs.

    Example:
        optimize_grid((1024, 1344, 33), 16).grid_dims  # (4, 4, 1), objective 625
    """
    best = next(c for c in grid_table(dims, procs, rank) if c.optimal)
    logger.debug(f"Optimal grid for {tuple(dims)} on {procs}: {best.label}", extra={"objective": best.objective})
    return best


def unique_shapes(choices: Sequence[GridChoice]) -> List[GridChoice]:
    """Collapse permutations: one row per sorted shape (largest extents first)."""
    seen = {}
    for choice in choices:
        shape = tuple(sorted(choice.grid_dims, reverse=True))
        if shape not in seen or choice.objective < seen[shape].objective:
            seen[shape] = choice
    return sorted(seen.values(), key=lambda c: sorted(c.grid_dims, reverse=True), reverse=True)
