"""MTTKRP kernels: naive reference, dimension tree and flop accounting."""

from parnncp.modules.mttkrp.dimtree import (
    DimensionTree,
    DimTreeMttkrp,
    TreeShapeError,
    build_tree,
    multi_ttv,
    partial_mttkrp,
    tree_mttkrp_sweep,
)
from parnncp.modules.mttkrp.flops import FlopLedger, naive_sweep_flops, sweep_flop_model
from parnncp.modules.mttkrp.naive import NaiveMttkrp, mttkrp_naive

__all__ = [
    "DimTreeMttkrp",
    "DimensionTree",
    "FlopLedger",
    "NaiveMttkrp",
    "TreeShapeError",
    "build_tree",
    "mttkrp_naive",
    "multi_ttv",
    "naive_sweep_flops",
    "partial_mttkrp",
    "sweep_flop_model",
    "tree_mttkrp_sweep",
]
