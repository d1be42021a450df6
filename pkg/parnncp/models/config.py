"""
Run configuration models.

NncpConfig is shared by the sequential and the parallel driver; defaults
come from core settings so a `.env` file can change them per machine.
"""

from enum import Enum

from pydantic import BaseModel, Field

from parnncp.core.config import settings


class NlsMethod(str, Enum):
    """
    Nonnegative least squares update used for every factor.

    - BPP: block principal pivoting, solves each row exactly
    - HALS: one cycle of column updates per inner iteration
    """
    BPP = "bpp"
    HALS = "hals"


class WorkerMode(str, Enum):
    """
    How the virtual workers of a parallel run are executed.

    - SIM: one thread steps every worker to its next collective
    - THREADS: one thread per worker, synchronizing inside collectives
    """
    SIM = "sim"
    THREADS = "threads"


class NncpConfig(BaseModel):
    """
    Parameters of one NNCP run.

    Example:
        NncpConfig(rank=4, max_outer_iters=200, tolerance=1e-8, nls_method="bpp")
    """
    rank: int = Field(default_factory=lambda: settings.DEFAULT_RANK, ge=1, description="CP rank R")
    max_outer_iters: int = Field(
        default_factory=lambda: settings.DEFAULT_MAX_OUTER_ITERS,
        ge=1,
        description="Upper bound on outer iterations",
    )
    tolerance: float = Field(
        default_factory=lambda: settings.DEFAULT_TOLERANCE,
        ge=0.0,
        description="Stop when |eps_t - eps_(t-1)| < tolerance; 0 runs a fixed number of iterations",
    )
    nls_method: NlsMethod = Field(
        default_factory=lambda: NlsMethod(settings.DEFAULT_NLS_METHOD),
        description="NLS update",
    )
    use_dimension_tree: bool = Field(True, description="Serve MTTKRPs from a dimension tree")
    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED, description="Seed for factor initialization")

    def __repr__(self):
        return f"<NncpConfig R={self.rank} nls={self.nls_method.value} iters={self.max_outer_iters}>"
