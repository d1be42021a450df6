"""Row-wise nonnegative least squares updates."""

from parnncp.modules.nls.bpp import BppSolution, nnls_bpp, solve_bpp
from parnncp.modules.nls.errors import NlsConvergenceError, SingularSystemError
from parnncp.modules.nls.hals import hals_update
from parnncp.modules.nls.unconstrained import ls_unconstrained

__all__ = [
    "BppSolution",
    "NlsConvergenceError",
    "SingularSystemError",
    "hals_update",
    "ls_unconstrained",
    "nnls_bpp",
    "solve_bpp",
]
