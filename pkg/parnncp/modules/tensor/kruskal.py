"""Kruskal (weighted CP) models."""

import logging
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from parnncp.modules.tensor.dense import DenseTensor, TensorShapeError
from parnncp.modules.tensor.kernels import khatri_rao

logger = logging.getLogger(__name__)


class KruskalModel(BaseModel):
    """
    [[lambda; H(1), ..., H(N)]]: sum_r lambda_r h(1)_r o ... o h(N)_r.

    Example:
        model = KruskalModel(factors=[H1, H2, H3], weights=np.ones(R))
        model.full()             # DenseTensor
        model.fit_error(tensor)  # ||A - full|| / ||A||
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    factors: List[np.ndarray] = Field(..., description="N factor matrices, I_n x R")
    weights: np.ndarray = Field(..., description="Length-R weight vector lambda")

    @field_validator("factors", mode="before")
    @classmethod
    def _as_float_matrices(cls, factors: List[np.ndarray]) -> List[np.ndarray]:
        out = [np.ascontiguousarray(f, dtype=np.float64) for f in factors]
        if not out or any(f.ndim != 2 for f in out):
            raise TensorShapeError("factors must be a non-empty list of 2-D arrays")
        return out

    @field_validator("weights", mode="before")
    @classmethod
    def _as_float_vector(cls, weights: np.ndarray) -> np.ndarray:
        return np.ascontiguousarray(weights, dtype=np.float64).reshape(-1)

    @model_validator(mode="after")
    def _consistent_rank(self) -> "KruskalModel":
        rank = self.weights.size
        if any(f.shape[1] != rank for f in self.factors):
            raise TensorShapeError(
                f"factor column counts {[f.shape[1] for f in self.factors]} do not match {rank} weights"
            )
        return self

    @property
    def rank(self) -> int:
        return int(self.weights.size)

    @property
    def ndims(self) -> int:
        return len(self.factors)

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(f.shape[0] for f in self.factors)

    def full(self) -> DenseTensor:
        """Materialize the model as a dense tensor."""
        return DenseTensor(self.dims, khatri_rao(self.factors) @ self.weights)

    def fit_error(self, tensor: DenseTensor) -> float:
        """Relative reconstruction error ||A - full|| / ||A||."""
        if tensor.dims != self.dims:
            raise TensorShapeError(f"tensor dims {tensor.dims} do not match model dims {self.dims}")
        residual = tensor.data - self.full().data
        return float(np.linalg.norm(residual) / np.linalg.norm(tensor.data))

    def is_normalized(self, tol: float = 1e-12) -> bool:
        """Unit 2-norm columns in every factor and nonnegative weights."""
        norms_ok = all(np.all(np.abs(np.linalg.norm(f, axis=0) - 1.0) <= tol) for f in self.factors)
        return bool(norms_ok and np.all(self.weights >= 0))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KruskalModel):
            return NotImplemented
        return (
            np.array_equal(self.weights, other.weights)
            and len(self.factors) == len(other.factors)
            and all(np.array_equal(a, b) for a, b in zip(self.factors, other.factors))
        )

    def __repr__(self):
        return f"<KruskalModel {'x'.join(map(str, self.dims))} R={self.rank}>"
