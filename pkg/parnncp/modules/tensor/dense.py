"""
Dense N-way tensors in generalized column-major layout.

Entry (i_1, ..., i_N) (1-indexed) lives at flat offset
sum_n (i_n - 1) * prod_{m<n} I_m, i.e. mode 1 varies fastest. This is
numpy's Fortran order, so every contiguous split of the modes
{1..s} | {s+1..N} is a plain 2-D view of the flat buffer.
"""

import logging
import math
from typing import Sequence, Tuple

import numpy as np

from parnncp.core.errors import ParNncpError

logger = logging.getLogger(__name__)


class TensorShapeError(ParNncpError, ValueError):
    """Raised for invalid extents, indices, modes or mismatched shapes."""
    pass


def _check_dims(dims: Sequence[int]) -> Tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if len(dims) < 1:
        raise TensorShapeError("a tensor needs at least one mode")
    if any(d < 1 for d in dims):
        raise TensorShapeError(f"every extent must be >= 1, got {dims}")
    return dims


def entry_offset(dims: Sequence[int], multi_index: Sequence[int]) -> int:
    """
    Flat storage offset of a 1-indexed multi-index.

    Args:
        dims: Extents I_1..I_N
        multi_index: (i_1, ..., i_N) with 1 <= i_n <= I_n

    Returns:
        0-indexed offset into the flat data

    Raises:
        TensorShapeError: If the index has the wrong length or is out of range

    Example:
        entry_offset((2, 3, 4), (1, 2, 3))  # 14
    """
    dims = _check_dims(dims)
    if len(multi_index) != len(dims):
        raise TensorShapeError(f"index {tuple(multi_index)} has {len(multi_index)} modes, tensor has {len(dims)}")

    offset = 0
    stride = 1
    for n, (i, d) in enumerate(zip(multi_index, dims), start=1):
        if not 1 <= i <= d:
            raise TensorShapeError(f"index {i} out of range 1..{d} in mode {n}")
        offset += (i - 1) * stride
        stride *= d
    return offset


def decode_offset(dims: Sequence[int], offset: int) -> Tuple[int, ...]:
    """Inverse of entry_offset: 1-indexed multi-index of a flat offset."""
    dims = _check_dims(dims)
    total = math.prod(dims)
    if not 0 <= offset < total:
        raise TensorShapeError(f"offset {offset} out of range 0..{total - 1}")

    index = []
    for d in dims:
        index.append(offset % d + 1)
        offset //= d
    return tuple(index)


class DenseTensor:
    """
    Dense float64 tensor with flat generalized column-major storage.

    Usage:
        X = DenseTensor.from_array(np.arange(1.0, 9.0).reshape(2, 2, 2, order="F"))
        X.entry((1, 2, 1))             # 3.0
        X.split_matricization(1).matrix  # 2 x 4 view, no copy
    """

    __slots__ = ("dims", "data")

    def __init__(self, dims: Sequence[int], data: np.ndarray):
        self.dims = _check_dims(dims)
        data = np.ascontiguousarray(data, dtype=np.float64).reshape(-1)
        if data.size != self.size:
            raise TensorShapeError(f"data has {data.size} entries, dims {self.dims} need {self.size}")
        self.data = data

    @classmethod
    def from_array(cls, array: np.ndarray) -> "DenseTensor":
        """Build from an N-d array indexed [i_1, ..., i_N] (0-indexed)."""
        array = np.asarray(array, dtype=np.float64)
        if array.ndim == 0:
            raise TensorShapeError("a tensor needs at least one mode")
        return cls(array.shape, array.reshape(-1, order="F"))

    @classmethod
    def zeros(cls, dims: Sequence[int]) -> "DenseTensor":
        dims = _check_dims(dims)
        return cls(dims, np.zeros(math.prod(dims)))

    @property
    def ndims(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return math.prod(self.dims)

    def to_array(self) -> np.ndarray:
        """N-d view indexed [i_1, ..., i_N] (0-indexed), sharing storage."""
        return self.data.reshape(self.dims, order="F")

    def entry(self, multi_index: Sequence[int]) -> float:
        return float(self.data[entry_offset(self.dims, multi_index)])

    def split_matricization(self, s: int) -> "SplitMatricization":
        return SplitMatricization(self, s)

    def norm_squared(self) -> float:
        return float(np.dot(self.data, self.data))

    def copy(self) -> "DenseTensor":
        return DenseTensor(self.dims, self.data.copy())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DenseTensor):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.data, other.data)

    def __repr__(self):
        return f"<DenseTensor {'x'.join(map(str, self.dims))}>"


class SplitMatricization:
    """
    Contiguous split {1..s} | {s+1..N} of a tensor as a 2-D view.

    The view aliases the tensor's flat data: element (r, c) is the entry
    whose offset is r + c * prod_{n<=s} I_n.
    """

    def __init__(self, tensor: DenseTensor, s: int):
        if not 1 <= s < tensor.ndims:
            raise TensorShapeError(f"split point {s} must be in 1..{tensor.ndims - 1}")
        self.tensor = tensor
        self.split = s
        self.rows = math.prod(tensor.dims[:s])
        self.cols = math.prod(tensor.dims[s:])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    @property
    def matrix(self) -> np.ndarray:
        return self.tensor.data.reshape((self.rows, self.cols), order="F")

    def multi_index(self, row: int, col: int) -> Tuple[int, ...]:
        """Tensor multi-index (1-indexed) behind view element (row, col), 0-indexed."""
        return decode_offset(self.tensor.dims, row + col * self.rows)


def mode_n_matricize(tensor: DenseTensor, n: int) -> np.ndarray:
    """
    Mode-n unfolding as an explicit I_n x (I / I_n) copy.

    Column j is the j-th mode-n fiber with the remaining modes ordered
    column-major. Reference path only; the dimension tree never calls it.

    Raises:
        TensorShapeError: If n is not in 1..N
    """
    if not 1 <= n <= tensor.ndims:
        raise TensorShapeError(f"mode {n} out of range 1..{tensor.ndims}")
    moved = np.moveaxis(tensor.to_array(), n - 1, 0)
    return np.ascontiguousarray(moved.reshape(tensor.dims[n - 1], -1, order="F"))
