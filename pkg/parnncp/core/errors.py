"""Base exception for the toolkit. Modules subclass it next to their code."""


class ParNncpError(Exception):
    """Base class for all errors raised by parnncp."""
    pass
