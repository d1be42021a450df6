"""Parallel engine exceptions."""

from parnncp.core.errors import ParNncpError


class GridError(ParNncpError, ValueError):
    """Raised for invalid processor grids (zero extents, wrong mode count)."""
    pass


class DistributionError(ParNncpError, ValueError):
    """Raised when a tensor does not divide evenly over the grid and padding is off."""
    pass


class CollectiveError(ParNncpError, ValueError):
    """Raised for mismatched collective calls, bad partitions or deadlocks."""
    pass


class ReplicationError(ParNncpError, AssertionError):
    """Raised when members of a mode-n slice hold different factor slabs."""
    pass
