"""Processor-grid choices and leading-order cost estimates."""

from typing import List, Tuple

from pydantic import BaseModel, Field


class GridChoice(BaseModel):
    """
    One factorization of P into a processor grid.

    objective is sum_n I_n/P_n, which is both the per-iteration factor
    communication (per unit rank) and the factor replica memory.
    """
    grid_dims: Tuple[int, ...] = Field(..., description="P_1 x ... x P_N")
    objective: float = Field(..., description="sum_n I_n / P_n")
    comm_words: float = Field(..., description="Predicted per-iteration words R * objective")
    optimal: bool = Field(False, description="Minimizer among all factorizations")

    @property
    def label(self) -> str:
        return "x".join(str(p) for p in self.grid_dims)

    @property
    def total_procs(self) -> int:
        total = 1
        for p in self.grid_dims:
            total *= p
        return total


class CostEstimate(BaseModel):
    """Leading-order per-iteration costs, constants dropped."""
    dims: List[int]
    grid_dims: Tuple[int, ...]
    rank: int
    dimension_tree: bool
    computation_flops: float
    communication_words: float
    memory_mttkrp_words: float = Field(..., description="Local MTTKRP temporary")
    memory_replica_words: float = Field(..., description="Gathered factor slices")

    @property
    def memory_words(self) -> float:
        return self.memory_mttkrp_words + self.memory_replica_words
