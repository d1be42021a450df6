"""Exact low-rank nonnegative test tensors."""

import logging
from typing import Sequence, Tuple

import numpy as np

from parnncp.modules.tensor.dense import DenseTensor, TensorShapeError
from parnncp.modules.tensor.kruskal import KruskalModel

logger = logging.getLogger(__name__)


def low_rank_model(dims: Sequence[int], rank: int, seed: int = 0, ones: bool = False) -> KruskalModel:
    """
    Generating model with uniform [0, 1) factors drawn in mode order and unit weights.

    With ones=True every factor entry is 1 (debugging aid).
    """
    if rank < 1:
        raise TensorShapeError(f"rank must be >= 1, got {rank}")
    if not dims or any(d < 1 for d in dims):
        raise TensorShapeError(f"invalid dims {tuple(dims)}")
    rng = np.random.default_rng(seed)
    if ones:
        factors = [np.ones((d, rank)) for d in dims]
    else:
        factors = [rng.random((d, rank)) for d in dims]
    return KruskalModel(factors=factors, weights=np.ones(rank))


def low_rank_tensor(
    dims: Sequence[int], rank: int, seed: int = 0, ones: bool = False
) -> Tuple[DenseTensor, KruskalModel]:
    """
    Materialize sum_r h1_r o ... o hN_r; returns the tensor and its generating model.

    Example:
        tensor, truth = low_rank_tensor((8, 8, 8), 2, seed=7)
    """
    model = low_rank_model(dims, rank, seed, ones)
    tensor = model.full()
    logger.debug(
        f"Generated rank-{rank} tensor {tuple(dims)}",
        extra={"dims": list(dims), "rank": rank, "seed": seed, "ones": ones},
    )
    return tensor, model
