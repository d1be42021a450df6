"""Distributed NNCP driver, grid optimizer and cost estimates."""

from parnncp.modules.par_nncp.costs import estimate_costs
from parnncp.modules.par_nncp.driver import par_nncp
from parnncp.modules.par_nncp.grid_opt import enumerate_grids, grid_table, optimize_grid, unique_shapes

__all__ = [
    "enumerate_grids",
    "estimate_costs",
    "grid_table",
    "optimize_grid",
    "par_nncp",
    "unique_shapes",
]
