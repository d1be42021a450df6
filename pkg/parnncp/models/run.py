"""CLI run specification."""

from typing import List, Optional

from pydantic import BaseModel, Field, model_validator

from parnncp.models.config import NlsMethod, WorkerMode


class SyntheticSpec(BaseModel):
    """Exact low-rank nonnegative tensor built from seeded uniform factors."""
    dims: List[int] = Field(..., min_length=1)
    true_rank: int = Field(..., ge=1)
    seed: int = 0
    ones: bool = Field(False, description="Force every generating factor to ones (debugging)")

    @property
    def label(self) -> str:
        return f"synthetic:{'x'.join(map(str, self.dims))}:r{self.true_rank}:s{self.seed}"


class RunSpec(BaseModel):
    """
    Everything `parnncp run` needs.

    Exactly one of input_path / synthetic is set.
    """
    input_path: Optional[str] = None
    synthetic: Optional[SyntheticSpec] = None
    ranks: List[int] = Field(..., min_length=1, description="One run per rank (rank sweep)")
    iters: int = Field(..., ge=1)
    tol: float = Field(..., ge=0.0)
    seed: int = 0
    nls: NlsMethod = NlsMethod.BPP
    grid: Optional[str] = Field(None, description="PxQx.. or 'auto'; None runs sequentially")
    procs: Optional[int] = Field(None, ge=1, description="P for grid 'auto'")
    pad: bool = False
    dimtree: bool = True
    workers: WorkerMode = WorkerMode.SIM
    model_out: Optional[str] = None
    trace_out: Optional[str] = None
    ledger_out: Optional[str] = None
    omit_timings: bool = False
    alpha: Optional[float] = None
    beta: Optional[float] = None

    @model_validator(mode="after")
    def _one_input(self) -> "RunSpec":
        if (self.input_path is None) == (self.synthetic is None):
            raise ValueError("exactly one of input_path or synthetic must be given")
        if self.grid == "auto" and self.procs is None:
            raise ValueError("grid 'auto' needs procs")
        return self

    @property
    def is_parallel(self) -> bool:
        return self.grid is not None

    @property
    def input_label(self) -> str:
        return self.input_path if self.input_path else self.synthetic.label  # type: ignore[union-attr]
