"""Driver exceptions."""

from typing import Optional

from parnncp.core.errors import ParNncpError


class ZeroTensorError(ParNncpError, ValueError):
    """Raised when the relative error is requested for an all-zero tensor."""
    pass


class NonFiniteIterateError(ParNncpError):
    """
    Raised when an iterate picks up NaN or Inf.

    Attributes:
        phase: First phase that produced a non-finite value (MTTKRP, NLS, Gram, Error)
        mode: Mode being updated (1-indexed)
        iteration: Outer iteration (1-indexed)
    """

    def __init__(self, phase: str, mode: Optional[int] = None, iteration: Optional[int] = None):
        super().__init__(f"non-finite values after {phase} (mode {mode}, iteration {iteration})")
        self.phase = phase
        self.mode = mode
        self.iteration = iteration
