"""Reference MTTKRP that materializes the unfolding and the Khatri-Rao product."""

import logging
from typing import List, Optional, Sequence

import numpy as np

from parnncp.modules.mttkrp.flops import KRP, NAIVE_MTTKRP, FlopLedger
from parnncp.modules.tensor.dense import DenseTensor, TensorShapeError, mode_n_matricize
from parnncp.modules.tensor.kernels import khatri_rao, khatri_rao_flops

logger = logging.getLogger(__name__)


def _other_factors(tensor: DenseTensor, factors: Sequence[Optional[np.ndarray]], n: int) -> List[np.ndarray]:
    if len(factors) != tensor.ndims:
        raise TensorShapeError(f"expected {tensor.ndims} factor slots, got {len(factors)}")
    if not 1 <= n <= tensor.ndims:
        raise TensorShapeError(f"mode {n} out of range 1..{tensor.ndims}")

    others = []
    for m in range(1, tensor.ndims + 1):
        if m == n:
            continue
        H = factors[m - 1]
        if H is None:
            raise TensorShapeError(f"factor for mode {m} is missing")
        H = np.asarray(H, dtype=np.float64)
        if H.ndim != 2 or H.shape[0] != tensor.dims[m - 1]:
            raise TensorShapeError(f"factor {m} has shape {H.shape}, expected ({tensor.dims[m - 1]}, R)")
        others.append(H)
    return others


def mttkrp_naive(tensor: DenseTensor, factors: Sequence[Optional[np.ndarray]], n: int) -> np.ndarray:
    """
    M(n) = A_(n) (H(N) kr ... kr H(n+1) kr H(n-1) kr ... kr H(1)).

    Args:
        tensor: Input tensor
        factors: N slots, the slot of mode n may be None
        n: Mode (1-indexed)

    Returns:
        I_n x R matrix

    Raises:
        TensorShapeError: On a missing factor or mismatched shapes
    """
    others = _other_factors(tensor, factors, n)
    if tensor.ndims == 1:
        raise TensorShapeError("MTTKRP needs at least two modes")
    return mode_n_matricize(tensor, n) @ khatri_rao(others)


class NaiveMttkrp:
    """
    Serves M(n) by a full MTTKRP every time (dimension tree disabled).

    Same interface as DimTreeMttkrp so drivers can switch freely.
    """

    def __init__(self, tensor: DenseTensor, rank: int, ledger: Optional[FlopLedger] = None):
        if tensor.ndims < 2:
            raise TensorShapeError("MTTKRP needs at least two modes")
        self.tensor = tensor
        self.rank = rank
        self.ledger = ledger or FlopLedger()
        self.factors: List[Optional[np.ndarray]] = [None] * tensor.ndims

    def set_factor(self, n: int, H: np.ndarray) -> None:
        H = np.array(H, dtype=np.float64)
        if H.shape != (self.tensor.dims[n - 1], self.rank):
            raise TensorShapeError(f"factor {n} has shape {H.shape}, expected {(self.tensor.dims[n - 1], self.rank)}")
        self.factors[n - 1] = H

    def mttkrp(self, n: int) -> np.ndarray:
        others = _other_factors(self.tensor, self.factors, n)
        with self.ledger.timed(KRP):
            K = khatri_rao(others)
        self.ledger.add(KRP, khatri_rao_flops([H.shape[0] for H in others], self.rank))

        with self.ledger.timed(NAIVE_MTTKRP):
            M = mode_n_matricize(self.tensor, n) @ K
        self.ledger.add(NAIVE_MTTKRP, 2 * self.tensor.size * self.rank)
        return M
