"""NLS solver exceptions."""

from typing import List, Optional

from parnncp.core.errors import ParNncpError


class SingularSystemError(ParNncpError):
    """Raised when a system that must be solved exactly is singular."""
    pass


class NlsConvergenceError(ParNncpError):
    """
    Raised when BPP exhausts its exchange budget with rows still infeasible.

    Attributes:
        rows: Indices of the rows that did not converge
        infeasible: Number of infeasible variables left per such row
        iterations: Exchange rounds performed
    """

    def __init__(self, message: str, rows: Optional[List[int]] = None,
                 infeasible: Optional[List[int]] = None, iterations: int = 0):
        super().__init__(message)
        self.rows = rows or []
        self.infeasible = infeasible or []
        self.iterations = iterations
