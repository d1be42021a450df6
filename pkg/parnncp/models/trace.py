"""
Per-iteration trace records.

Phase taxonomy follows the usual breakdown of an NNCP iteration:
partial MTTKRP (pm), multi-TTV (mttv), Khatri-Rao products (krp), NLS,
Gram/normalization (gram) and error computation (err). Parallel runs add
predicted factor and Gram communication time plus the words behind them.
"""

import math
from typing import List, Optional

from pydantic import BaseModel, Field

BASE_COLUMNS = [
    "iter", "eps",
    "t_pm", "t_mttv", "t_krp", "t_nls", "t_gram", "t_err",
    "flops_pm", "flops_mttv", "flops_krp",
    "t_naive", "flops_naive",
]
COMM_COLUMNS = ["t_factor_comm", "t_gram_comm", "words_factor", "words_gram"]
TIMING_COLUMNS = {
    "t_pm", "t_mttv", "t_krp", "t_nls", "t_gram", "t_err", "t_naive",
}


class ErrorAccumulators(BaseModel):
    """
    Scalars behind the cheap relative error.

    a_sq is ||A||^2, inner_prod is <M(N), H_hat(N)>, model_sq is
    lambda^T (S(N) * G(N)) lambda.
    """
    a_sq: float = Field(..., description="Squared norm of the input tensor")
    inner_prod: float = Field(0.0, description="Inner product of the mode-N MTTKRP with the unnormalized factor")
    model_sq: float = Field(0.0, description="Squared norm of the current model")

    @property
    def radicand(self) -> float:
        """(aSq - 2 innerProd + modelSq) / aSq, clamped at zero."""
        return max((self.a_sq - 2.0 * self.inner_prod + self.model_sq) / self.a_sq, 0.0)

    @property
    def eps(self) -> float:
        return math.sqrt(self.radicand)


class IterationRecord(BaseModel):
    """One row of the trace CSV."""
    iter: int = Field(..., ge=1)
    eps: float
    t_pm: float = 0.0
    t_mttv: float = 0.0
    t_krp: float = 0.0
    t_nls: float = 0.0
    t_gram: float = 0.0
    t_err: float = 0.0
    flops_pm: int = 0
    flops_mttv: int = 0
    flops_krp: int = 0
    t_naive: float = 0.0
    flops_naive: int = 0

    # Parallel runs only
    t_factor_comm: Optional[float] = None
    t_gram_comm: Optional[float] = None
    words_factor: Optional[float] = None
    words_gram: Optional[float] = None

    @property
    def has_comm(self) -> bool:
        return self.words_factor is not None

    @property
    def mttkrp_seconds(self) -> float:
        return self.t_pm + self.t_mttv + self.t_naive


class IterationTrace(BaseModel):
    """
    Ordered per-iteration records of one run.

    Usage:
        trace.eps_history()       # [eps_1, eps_2, ...]
        trace.phase_totals()      # {"MTTKRP": ..., "KRP": ..., ...}
    """
    records: List[IterationRecord] = Field(default_factory=list)

    def append(self, record: IterationRecord) -> None:
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def final_eps(self) -> Optional[float]:
        return self.records[-1].eps if self.records else None

    def eps_history(self) -> List[float]:
        return [r.eps for r in self.records]

    def phase_totals(self) -> dict:
        """Seconds per phase summed over iterations, in report order."""
        totals = {
            "MTTKRP": sum(r.mttkrp_seconds for r in self.records),
            "KRP": sum(r.t_krp for r in self.records),
            "NLS": sum(r.t_nls for r in self.records),
            "Gram": sum(r.t_gram for r in self.records),
            "Error": sum(r.t_err for r in self.records),
        }
        if self.records and self.records[0].has_comm:
            totals["Factor Comm"] = sum(r.t_factor_comm or 0.0 for r in self.records)
            totals["Gram Comm"] = sum(r.t_gram_comm or 0.0 for r in self.records)
        return totals
