"""
Binary tensor and model files.

Tensor file: b"DTEN0001", u64 N, N x u64 extents, then I float64 entries
in generalized column-major order. All integers and floats little-endian,
no padding.

Model file: b"DKTM0001", u64 N, u64 R, N x u64 extents, R float64 weights,
then each factor I_n x R in column-major order, mode 1 first.

Writes are atomic (temp file + rename) and retried on transient errors.
"""

import logging
import math
import os
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from tenacity import retry, retry_if_exception_type, stop_after_attempt, wait_exponential

from parnncp.core.config import settings
from parnncp.core.errors import ParNncpError
from parnncp.modules.tensor.dense import DenseTensor
from parnncp.modules.tensor.kruskal import KruskalModel

logger = logging.getLogger(__name__)

TENSOR_MAGIC = b"DTEN0001"
MODEL_MAGIC = b"DKTM0001"

U64 = np.dtype("<u8")
F64 = np.dtype("<f8")

# Errors worth retrying for a local file write
TRANSIENT_IO_ERRORS = (BlockingIOError, InterruptedError)

PathLike = Union[str, Path]


class TensorFormatError(ParNncpError):
    """Raised when a tensor or model file is truncated or has a bad header."""
    pass


@retry(
    stop=stop_after_attempt(settings.IO_MAX_RETRIES),
    wait=wait_exponential(multiplier=settings.IO_RETRY_WAIT_SECONDS, max=1),
    retry=retry_if_exception_type(TRANSIENT_IO_ERRORS),
    reraise=True,
)
def atomic_write_bytes(path: PathLike, payload: bytes) -> None:
    """
    Write bytes to path via a sibling temp file and os.replace.

    Readers never observe a partially written artifact.
    """
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


def atomic_write_text(path: PathLike, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def encode_tensor(tensor: DenseTensor) -> bytes:
    header = TENSOR_MAGIC + np.array([tensor.ndims], dtype=U64).tobytes()
    header += np.array(tensor.dims, dtype=U64).tobytes()
    return header + tensor.data.astype(F64).tobytes()


def write_tensor(path: PathLike, tensor: DenseTensor) -> None:
    atomic_write_bytes(path, encode_tensor(tensor))
    logger.info(f"Wrote tensor {tensor!r} to {path}", extra={"path": str(path), "dims": list(tensor.dims)})


class _Reader:
    """Sequential little-endian reader that reports truncation."""

    def __init__(self, payload: bytes, path: str):
        self.payload = payload
        self.pos = 0
        self.path = path

    def take(self, dtype: np.dtype, count: int) -> np.ndarray:
        nbytes = dtype.itemsize * count
        if self.pos + nbytes > len(self.payload):
            raise TensorFormatError(f"{self.path}: truncated file")
        values = np.frombuffer(self.payload, dtype=dtype, count=count, offset=self.pos)
        self.pos += nbytes
        return values

    def remaining(self) -> int:
        return len(self.payload) - self.pos

    def finish(self) -> None:
        if self.pos != len(self.payload):
            raise TensorFormatError(f"{self.path}: {len(self.payload) - self.pos} trailing bytes")


def _read_header(path: PathLike, magic: bytes) -> Tuple[_Reader, int]:
    payload = Path(path).read_bytes()
    if payload[: len(magic)] != magic:
        raise TensorFormatError(f"{path}: bad magic, expected {magic.decode()}")
    reader = _Reader(payload, str(path))
    reader.pos = len(magic)
    ndims = int(reader.take(U64, 1)[0])
    if ndims < 1:
        raise TensorFormatError(f"{path}: tensor must have at least one mode")
    return reader, ndims


def read_tensor(path: PathLike) -> DenseTensor:
    """
    Load a DTEN0001 tensor file.

    Raises:
        TensorFormatError: On a bad header, zero extents or a length mismatch
        OSError: If the file can't be read
    """
    reader, ndims = _read_header(path, TENSOR_MAGIC)
    dims = tuple(int(d) for d in reader.take(U64, ndims))
    if any(d < 1 for d in dims):
        raise TensorFormatError(f"{path}: zero extent in {dims}")
    count = math.prod(dims)
    if count * F64.itemsize > reader.remaining():
        raise TensorFormatError(
            f"{path}: truncated file, header declares {count} entries, payload holds {reader.remaining() // F64.itemsize}"
        )
    data = reader.take(F64, count).astype(np.float64)
    reader.finish()
    return DenseTensor(dims, data)


def encode_model(model: KruskalModel) -> bytes:
    header = MODEL_MAGIC + np.array([model.ndims, model.rank], dtype=U64).tobytes()
    header += np.array(model.dims, dtype=U64).tobytes()
    blocks = [model.weights.astype(F64).tobytes()]
    blocks += [f.astype(F64).tobytes(order="F") for f in model.factors]
    return header + b"".join(blocks)


def write_model(path: PathLike, model: KruskalModel) -> None:
    atomic_write_bytes(path, encode_model(model))
    logger.info(f"Wrote model {model!r} to {path}", extra={"path": str(path), "rank": model.rank})


def read_model(path: PathLike) -> KruskalModel:
    """
    Load a DKTM0001 model file.

    Raises:
        TensorFormatError: On a bad header or a length mismatch
    """
    reader, ndims = _read_header(path, MODEL_MAGIC)
    rank = int(reader.take(U64, 1)[0])
    if rank < 1:
        raise TensorFormatError(f"{path}: rank must be >= 1")
    dims = [int(d) for d in reader.take(U64, ndims)]
    weights = reader.take(F64, rank).astype(np.float64)
    factors = [
        np.ascontiguousarray(reader.take(F64, d * rank).reshape((d, rank), order="F"))
        for d in dims
    ]
    reader.finish()
    return KruskalModel(factors=factors, weights=weights)
