"""Trace CSV export."""

import csv
import io
import logging
from pathlib import Path
from typing import List, Union

from parnncp.models.trace import BASE_COLUMNS, COMM_COLUMNS, TIMING_COLUMNS, IterationTrace
from parnncp.modules.tensor.io import atomic_write_text

logger = logging.getLogger(__name__)


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def trace_columns(trace: IterationTrace) -> List[str]:
    if trace.records and trace.records[0].has_comm:
        return BASE_COLUMNS + COMM_COLUMNS
    return list(BASE_COLUMNS)


def trace_to_csv(trace: IterationTrace, omit_timings: bool = False) -> str:
    """
    Render the trace as CSV text.

    Floats are written with repr() so values survive a round trip exactly.
    With omit_timings the wall-clock columns (t_pm ... t_naive) are written
    as 0 and the file is byte-reproducible; predicted communication times
    are model values and always kept.
    """
    columns = trace_columns(trace)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for record in trace.records:
        row = record.model_dump()
        if omit_timings:
            for column in TIMING_COLUMNS:
                row[column] = 0.0
        writer.writerow([_format(row[c]) for c in columns])
    return buffer.getvalue()


def write_trace_csv(path: Union[str, Path], trace: IterationTrace, omit_timings: bool = False) -> None:
    atomic_write_text(path, trace_to_csv(trace, omit_timings=omit_timings))
    logger.info(f"Wrote trace ({len(trace)} rows) to {path}", extra={"path": str(path)})
