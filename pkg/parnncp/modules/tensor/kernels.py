"""Khatri-Rao, Gram and Hadamard kernels on factor matrices."""

from typing import Sequence

import numpy as np

from parnncp.modules.tensor.dense import DenseTensor, TensorShapeError


def khatri_rao(matrices: Sequence[np.ndarray]) -> np.ndarray:
    """
    Column-wise Kronecker (row-wise Hadamard) product.

    For two inputs K(i + I_A (j-1), :) = A(i, :) * B(j, :): the first
    operand varies fastest. More inputs fold left to right, so passing
    factors in ascending mode order gives rows in the column-major order
    of the remaining modes.

    Args:
        matrices: One or more 2-D arrays with the same column count

    Returns:
        (prod rows) x R array

    Raises:
        TensorShapeError: On an empty list or mismatched column counts

    Example:
        khatri_rao([[[1, 2], [3, 4]], [[5, 6], [7, 8]]])
        # [[5, 12], [15, 24], [7, 16], [21, 32]]
    """
    if len(matrices) == 0:
        raise TensorShapeError("khatri_rao needs at least one matrix")

    mats = [np.asarray(m, dtype=np.float64) for m in matrices]
    if any(m.ndim != 2 for m in mats):
        raise TensorShapeError("khatri_rao operands must be 2-D")
    rank = mats[0].shape[1]
    if any(m.shape[1] != rank for m in mats):
        raise TensorShapeError(f"column counts differ: {[m.shape[1] for m in mats]}")

    result = np.ascontiguousarray(mats[0])
    for mat in mats[1:]:
        result = (mat[:, None, :] * result[None, :, :]).reshape(-1, rank)
    return result


def khatri_rao_flops(row_counts: Sequence[int], rank: int) -> int:
    """Multiplications performed by khatri_rao on matrices with these row counts."""
    flops = 0
    rows = row_counts[0] if row_counts else 0
    for count in row_counts[1:]:
        rows *= count
        flops += rows * rank
    return flops


def gram(H: np.ndarray) -> np.ndarray:
    """H^T H, symmetric to the last bit (upper triangle mirrored)."""
    H = np.asarray(H, dtype=np.float64)
    G = H.T @ H
    upper = np.triu(G)
    return upper + np.triu(G, 1).T


def hadamard_all_but(grams: Sequence[np.ndarray], n: int) -> np.ndarray:
    """
    Elementwise product of every Gram except mode n (1-indexed).

    Raises:
        TensorShapeError: If fewer than two grams are given or n is out of range
    """
    if len(grams) < 2:
        raise TensorShapeError("hadamard_all_but needs at least two grams")
    if not 1 <= n <= len(grams):
        raise TensorShapeError(f"mode {n} out of range 1..{len(grams)}")

    others = [g for m, g in enumerate(grams, start=1) if m != n]
    S = np.array(others[0], dtype=np.float64)
    for g in others[1:]:
        S *= g
    return S


def norm_squared(tensor: DenseTensor) -> float:
    """Sum of squared entries."""
    return tensor.norm_squared()
