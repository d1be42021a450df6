"""
Command-line front end.

    python -m parnncp gen  --dims 8x8x8 --rank 2 --seed 7 --out t.dten
    python -m parnncp run  --input t.dten --rank 2 --iters 100 --trace trace.csv
    python -m parnncp run  --synthetic 16x16x16 --true-rank 3 --rank 3 --grid 2x2x2 --ledger ledger.csv
    python -m parnncp grid --dims 1024x1344x33 --procs 16

Exit status: 0 on success, 1 on a decomposition or I/O failure, 2 on bad usage.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from pydantic import ValidationError

from parnncp import __version__
from parnncp.core.config import settings
from parnncp.core.errors import ParNncpError
from parnncp.core.run_logger import log_run
from parnncp.core.sentry import capture_run_error, init_sentry
from parnncp.models.comm import CostModel
from parnncp.models.config import NlsMethod, NncpConfig, WorkerMode
from parnncp.models.run import RunSpec, SyntheticSpec
from parnncp.modules.driver.nncp import nncp
from parnncp.modules.driver.trace_export import write_trace_csv
from parnncp.modules.par_nncp.costs import estimate_costs
from parnncp.modules.par_nncp.driver import par_nncp
from parnncp.modules.par_nncp.grid_opt import grid_table, optimize_grid, unique_shapes
from parnncp.modules.parallel.grid import ProcessGrid
from parnncp.modules.parallel.ledger import write_ledger_csv
from parnncp.modules.reports.render import render_cost_table, render_grid_table, render_run_summary
from parnncp.modules.tensor.dense import DenseTensor
from parnncp.modules.tensor.io import read_tensor, write_model, write_tensor
from parnncp.modules.tensor.synthetic import low_rank_tensor

logger = logging.getLogger(__name__)

MODEL_SIDECAR_SUFFIX = ".model"


# ============================================================================
# ARGUMENT PARSING
# ============================================================================

def parse_dims(text: str) -> List[int]:
    """'8x8x8' -> [8, 8, 8]"""
    try:
        dims = [int(part) for part in text.lower().split("x")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid extents {text!r}, expected e.g. 8x8x8")
    if any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError(f"extents must be >= 1, got {text!r}")
    return dims


def parse_rank_sweep(text: str) -> List[int]:
    """'2:8:2' -> [2, 4, 6, 8] (end inclusive, step defaults to 1)."""
    parts = text.split(":")
    try:
        values = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid rank sweep {text!r}, expected a:b[:step]")
    if len(values) == 2:
        values.append(1)
    if len(values) != 3:
        raise argparse.ArgumentTypeError(f"invalid rank sweep {text!r}, expected a:b[:step]")
    start, stop, step = values
    if start < 1 or step < 1 or stop < start:
        raise argparse.ArgumentTypeError(f"rank sweep {text!r} must satisfy 1 <= a <= b and step >= 1")
    return list(range(start, stop + 1, step))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="parnncp", description="Dense nonnegative CP decomposition")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="Write an exact low-rank nonnegative tensor")
    gen.add_argument("--dims", type=parse_dims, required=True, help="Extents, e.g. 8x8x8")
    gen.add_argument("--rank", type=int, required=True, help="Rank of the generating model")
    gen.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    gen.add_argument("--out", required=True, help="Tensor file; the model goes to <out>.model")
    gen.add_argument("--ones", action="store_true", help="Force every generating factor to ones")

    run = sub.add_parser("run", help="Decompose a tensor sequentially or on a virtual grid")
    source = run.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", help="DTEN0001 tensor file")
    source.add_argument("--synthetic", type=parse_dims, help="Generate an exact low-rank tensor with these extents")
    run.add_argument("--true-rank", type=int, default=None, help="Generating rank for --synthetic (default: --rank)")
    run.add_argument("--data-seed", type=int, default=0, help="Seed of the synthetic generator")
    ranks = run.add_mutually_exclusive_group()
    ranks.add_argument("--rank", type=int, default=None, help=f"CP rank (default {settings.DEFAULT_RANK})")
    ranks.add_argument("--rank-sweep", type=parse_rank_sweep, default=None, help="a:b[:step], one run per rank")
    run.add_argument("--iters", type=int, default=settings.DEFAULT_MAX_OUTER_ITERS)
    run.add_argument("--tol", type=float, default=settings.DEFAULT_TOLERANCE)
    run.add_argument("--seed", type=int, default=settings.DEFAULT_SEED, help="Initialization seed")
    run.add_argument("--nls", choices=[m.value for m in NlsMethod], default=settings.DEFAULT_NLS_METHOD)
    run.add_argument("--grid", default=None, help="PxQx... or 'auto'; omit for a sequential run")
    run.add_argument("--procs", type=int, default=None, help="Processor count for --grid auto")
    run.add_argument("--pad", action="store_true", help="Zero-pad modes the grid does not divide")
    run.add_argument("--no-dimtree", dest="dimtree", action="store_false", help="Compute every MTTKRP from scratch")
    run.add_argument("--workers", choices=[m.value for m in WorkerMode], default=settings.DEFAULT_WORKER_MODE)
    run.add_argument("--out", default=None, help="Model file")
    run.add_argument("--trace", default=None, help="Trace CSV")
    run.add_argument("--ledger", default=None, help="Communication ledger CSV (parallel runs)")
    run.add_argument("--omit-timings", action="store_true", help="Write wall-clock columns as 0")
    run.add_argument("--alpha", type=float, default=None, help="Cost model latency per message (s)")
    run.add_argument("--beta", type=float, default=None, help="Cost model time per word (s)")

    grid = sub.add_parser("grid", help="Rank every processor grid for a tensor shape")
    grid.add_argument("--dims", type=parse_dims, required=True)
    grid.add_argument("--procs", type=int, required=True)
    grid.add_argument("--rank", type=int, default=1, help="Scales the predicted words per iteration")
    grid.add_argument("--unique", action="store_true", help="One row per grid shape, ignoring mode order")
    return parser


def build_run_spec(args: argparse.Namespace) -> RunSpec:
    """
    RunSpec from parsed `run` arguments.

    Raises:
        ValidationError: If the combination of flags is inconsistent
    """
    ranks = args.rank_sweep or [args.rank if args.rank is not None else settings.DEFAULT_RANK]
    synthetic = None
    if args.synthetic is not None:
        synthetic = SyntheticSpec(
            dims=args.synthetic,
            true_rank=args.true_rank if args.true_rank is not None else ranks[0],
            seed=args.data_seed,
        )
    return RunSpec(
        input_path=args.input,
        synthetic=synthetic,
        ranks=ranks,
        iters=args.iters,
        tol=args.tol,
        seed=args.seed,
        nls=args.nls,
        grid=args.grid,
        procs=args.procs,
        pad=args.pad,
        dimtree=args.dimtree,
        workers=args.workers,
        model_out=args.out,
        trace_out=args.trace,
        ledger_out=args.ledger,
        omit_timings=args.omit_timings,
        alpha=args.alpha,
        beta=args.beta,
    )


# ============================================================================
# COMMANDS
# ============================================================================

def sidecar_path(out: str) -> str:
    return out + MODEL_SIDECAR_SUFFIX


def cmd_gen(dims: Sequence[int], rank: int, seed: int, out: str, ones: bool = False) -> int:
    """Write the tensor and its generating model (<out>.model)."""
    tensor, model = low_rank_tensor(dims, rank, seed=seed, ones=ones)
    write_tensor(out, tensor)
    write_model(sidecar_path(out), model)
    print(f"wrote {out} ({'x'.join(map(str, dims))}, rank {rank}, seed {seed}) and {sidecar_path(out)}")
    return 0


def output_path(path: Optional[str], rank: int, sweep: bool) -> Optional[str]:
    """Artifact path for one rank; sweeps add an _r{R} suffix before the extension."""
    if path is None or not sweep:
        return path
    p = Path(path)
    return str(p.with_name(f"{p.stem}_r{rank}{p.suffix}"))


def load_input(spec: RunSpec) -> DenseTensor:
    if spec.input_path is not None:
        return read_tensor(spec.input_path)
    synthetic = spec.synthetic
    tensor, _ = low_rank_tensor(synthetic.dims, synthetic.true_rank, seed=synthetic.seed, ones=synthetic.ones)
    return tensor


def resolve_grid(spec: RunSpec, dims: Sequence[int], rank: int) -> Optional[ProcessGrid]:
    if spec.grid is None:
        return None
    if spec.grid == "auto":
        choice = optimize_grid(dims, spec.procs, rank)
        logger.info(f"Auto grid for P={spec.procs}: {choice.label}", extra={"grid": choice.label})
        return ProcessGrid(choice.grid_dims)
    return ProcessGrid.parse(spec.grid)


def cost_model_for(spec: RunSpec) -> CostModel:
    overrides = {k: v for k, v in (("alpha", spec.alpha), ("beta", spec.beta)) if v is not None}
    return CostModel(**overrides)


def run_one(spec: RunSpec, tensor: DenseTensor, rank: int) -> dict:
    """Decompose at one rank, write that rank's artifacts and return the journal entry."""
    sweep = len(spec.ranks) > 1
    config = NncpConfig(
        rank=rank,
        max_outer_iters=spec.iters,
        tolerance=spec.tol,
        nls_method=spec.nls,
        use_dimension_tree=spec.dimtree,
        seed=spec.seed,
    )
    grid = resolve_grid(spec, tensor.dims, rank)
    artifacts: List[Tuple[str, str]] = []
    words = None

    if grid is None:
        model, trace = nncp(tensor, config)
        ledger = None
    else:
        model, trace, ledger = par_nncp(
            tensor, grid, config, pad=spec.pad, worker_mode=spec.workers, cost_model=cost_model_for(spec)
        )
        last = trace.records[-1]
        words = (last.words_factor or 0.0) + (last.words_gram or 0.0)

    model_path = output_path(spec.model_out, rank, sweep)
    if model_path:
        write_model(model_path, model)
        artifacts.append(("model", model_path))
    trace_path = output_path(spec.trace_out, rank, sweep)
    if trace_path:
        write_trace_csv(trace_path, trace, omit_timings=spec.omit_timings)
        artifacts.append(("trace", trace_path))
    ledger_path = output_path(spec.ledger_out, rank, sweep)
    if ledger_path:
        if ledger is None:
            logger.warning("--ledger ignored for a sequential run", extra={"path": ledger_path})
        else:
            write_ledger_csv(ledger_path, ledger)
            artifacts.append(("ledger", ledger_path))

    grid_label = grid.label if grid is not None else None
    print(render_run_summary(
        spec.input_label, rank, spec.nls.value, grid_label, spec.dimtree, trace,
        words_per_iter=words, artifacts=artifacts,
    ))
    return {
        "input": spec.input_label,
        "rank": rank,
        "nls": spec.nls.value,
        "grid": grid_label,
        "dimtree": spec.dimtree,
        "iterations": len(trace),
        "final_eps": trace.final_eps,
        "phases": trace.phase_totals(),
    }


def cmd_run(spec: RunSpec) -> int:
    """Run every requested rank; stops at the first failure."""
    tensor = load_input(spec)
    for rank in spec.ranks:
        log_run(run_one(spec, tensor, rank))
    return 0


def cmd_grid(dims: Sequence[int], procs: int, rank: int = 1, unique: bool = False) -> int:
    choices = grid_table(dims, procs, rank)
    shown = unique_shapes(choices) if unique else choices
    print(render_grid_table(dims, procs, rank, shown))
    best = next(c for c in choices if c.optimal)
    estimates = [
        ("dimtree", estimate_costs(dims, best.grid_dims, rank, dimtree=True)),
        ("no dimtree", estimate_costs(dims, best.grid_dims, rank, dimtree=False)),
    ]
    print(render_cost_table(best.label, estimates))
    return 0


# ============================================================================
# ENTRY POINT
# ============================================================================

def configure_logging() -> None:
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return int(exit_.code or 0)

    configure_logging()
    init_sentry()

    context = {"command": args.command}
    try:
        if args.command == "gen":
            return cmd_gen(args.dims, args.rank, args.seed, args.out, ones=args.ones)
        if args.command == "grid":
            return cmd_grid(args.dims, args.procs, args.rank, unique=args.unique)
        try:
            spec = build_run_spec(args)
        except ValidationError as e:
            print(f"parnncp run: {e.errors()[0]['msg']}", file=sys.stderr)
            return 2
        context.update({"input": spec.input_label, "ranks": spec.ranks, "nls": spec.nls.value, "grid": spec.grid})
        return cmd_run(spec)
    except (ParNncpError, OSError) as e:
        capture_run_error(e, context)
        print(f"parnncp {args.command}: {e}", file=sys.stderr)
        return 1
