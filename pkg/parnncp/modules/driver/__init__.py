"""Sequential NNCP driver, normalization and the cheap relative error."""

from parnncp.modules.driver.error import CHEAP_EPS_FLOOR, relative_error
from parnncp.modules.driver.errors import NonFiniteIterateError, ZeroTensorError
from parnncp.modules.driver.nncp import nncp
from parnncp.modules.driver.normalize import normalize_columns
from parnncp.modules.driver.trace_export import trace_to_csv, write_trace_csv

__all__ = [
    "CHEAP_EPS_FLOOR",
    "NonFiniteIterateError",
    "ZeroTensorError",
    "nncp",
    "normalize_columns",
    "relative_error",
    "trace_to_csv",
    "write_trace_csv",
]
