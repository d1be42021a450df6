"""Render CLI reports from the templates module."""

from typing import List, Optional, Sequence, Tuple

from jinja2 import Environment, StrictUndefined

from parnncp.models.grid import CostEstimate, GridChoice
from parnncp.models.trace import IterationTrace
from parnncp.modules.reports.templates import COST_TABLE_TEXT, GRID_TABLE_TEXT, RUN_SUMMARY_TEXT

# Plain-text output: no autoescaping
_env = Environment(autoescape=False, undefined=StrictUndefined, keep_trailing_newline=True)


def render_run_summary(
    input_label: str,
    rank: int,
    nls: str,
    grid: Optional[str],
    dimtree: bool,
    trace: IterationTrace,
    words_per_iter: Optional[float] = None,
    artifacts: Sequence[Tuple[str, str]] = (),
) -> str:
    """
    Summary block for one decomposition.

    Usage:
        print(render_run_summary("t.dten", 4, "bpp", None, True, trace))
    """
    return _env.from_string(RUN_SUMMARY_TEXT).render(
        input=input_label,
        rank=rank,
        nls=nls,
        grid=grid or "sequential",
        dimtree=dimtree,
        iterations=len(trace),
        final_eps=trace.final_eps if trace.final_eps is not None else float("nan"),
        phases=trace.phase_totals(),
        words=words_per_iter,
        artifacts=list(artifacts),
    )


def render_grid_table(dims: Sequence[int], procs: int, rank: int, choices: List[GridChoice]) -> str:
    return _env.from_string(GRID_TABLE_TEXT).render(dims=list(dims), procs=procs, rank=rank, choices=choices)


def render_cost_table(grid_label: str, estimates: Sequence[Tuple[str, CostEstimate]]) -> str:
    return _env.from_string(COST_TABLE_TEXT).render(grid=grid_label, estimates=list(estimates))
