"""
Distributed NNCP over a virtual processor grid.

Per worker p and mode n (one inner iteration):

    M_bar      = Local-MTTKRP(A_p, {H(i)_{p_i}}, n)       local dimension tree
    M(n)_p     = Reduce-Scatter(M_bar, mode-n slice)       owned rows
    S(n)       = *_{m != n} G(m)                            replicated, no comm
    H_hat(n)_p = NLS(S(n), M(n)_p)                          owned rows only
    lambda     = sqrt(All-Reduce(local col norms^2))       all workers
    H(n)_p     = H_hat(n)_p / lambda
    G(n)       = All-Reduce(H(n)_p^T H(n)_p)               all workers
    H(n)_{p_n} = All-Gather(H(n)_p, mode-n slice)

After mode N one scalar All-Reduce of <M(N)_p, H_hat(N)_p> yields the
relative error on every worker, so every worker takes the same stopping
decision.

Setup gathers the slabs of modes 2..N only; the mode-1 slab first exists
after its first update.
"""

import logging
from typing import Generator, List, Optional, Sequence, Tuple, Union

import numpy as np

from parnncp.models.comm import CommCategory, CommLedger, CostModel
from parnncp.models.config import NncpConfig, WorkerMode
from parnncp.models.trace import ErrorAccumulators, IterationTrace
from parnncp.modules.driver.error import inner_product, model_norm_sq, relative_error
from parnncp.modules.driver.errors import ZeroTensorError
from parnncp.modules.driver.nncp import PhaseClock, converged, ledger_record, make_engine
from parnncp.modules.driver.normalize import column_sq_norms, finish_normalization, guard_dead_columns
from parnncp.modules.driver.steps import check_finite, initial_factors, nls_step
from parnncp.modules.mttkrp.flops import FlopLedger
from parnncp.modules.parallel.distribute import distribute_tensor, padded_dims
from parnncp.modules.parallel.grid import ALL_PROCS, ProcessGrid
from parnncp.modules.parallel.ledger import iteration_comm
from parnncp.modules.parallel.runtime import WorkerContext, spawn_grid
from parnncp.modules.tensor.dense import DenseTensor, TensorShapeError
from parnncp.modules.tensor.kernels import gram, hadamard_all_but
from parnncp.modules.tensor.kruskal import KruskalModel

logger = logging.getLogger(__name__)


def _real_rows(owned: Tuple[int, int], extent: int) -> int:
    """Owned rows that are not padding."""
    lo, hi = owned
    return max(0, min(hi, extent) - lo)


def _gather_slab(ctx: WorkerContext, n: int, category: CommCategory) -> Generator:
    """All-Gather the owned rows of mode n over its slice, then check replication."""
    rank = ctx.owned[n - 1].shape[1]  # type: ignore[union-attr]
    group = ctx.slice_group(n)
    parts = [rows * rank for rows in ctx.owned_partitions[n - 1]]
    slab = yield ctx.all_gather(ctx.owned[n - 1], group, parts, category)
    slab = slab.reshape(-1, rank)
    yield ctx.verify(slab, group)
    ctx.slabs[n - 1] = slab
    return slab


def worker_program(ctx: WorkerContext, config: NncpConfig, dims: Sequence[int]) -> Generator:
    """
    The per-worker BCD loop; yields collectives to the fabric.

    Returns:
        Dict with owned factor rows per mode, lambda and (on every worker) the trace rows
    """
    ndims = len(dims)
    rank = config.rank
    flops = FlopLedger()
    engine = make_engine(ctx.local, rank, config.use_dimension_tree, flops)

    ctx.iteration = 0
    a_sq = float((yield ctx.all_reduce(np.array([ctx.local.norm_squared()]), ALL_PROCS, CommCategory.SETUP))[0])
    if a_sq == 0.0:
        raise ZeroTensorError("cannot decompose an all-zero tensor")

    for n in range(2, ndims + 1):
        G = yield ctx.all_reduce(gram(ctx.owned[n - 1]), ALL_PROCS, CommCategory.SETUP)
        ctx.grams[n - 1] = G.reshape(rank, rank)
        slab = yield from _gather_slab(ctx, n, CommCategory.SETUP)
        engine.set_factor(n, slab)

    lam = np.ones(rank)
    records = []
    history: List[float] = []
    for it in range(1, config.max_outer_iters + 1):
        ctx.iteration = it
        before = flops.snapshot()
        clock = PhaseClock()
        eps = 0.0

        for n in range(1, ndims + 1):
            group = ctx.slice_group(n)
            parts = [rows * rank for rows in ctx.owned_partitions[n - 1]]

            M_bar = engine.mttkrp(n)
            check_finite(M_bar, "MTTKRP", n, it)
            M = (yield ctx.reduce_scatter(M_bar, group, parts, CommCategory.FACTOR)).reshape(-1, rank)

            start = clock.now()
            S = hadamard_all_but(ctx.grams, n)
            H_hat = nls_step(config.nls_method, ctx.owned[n - 1] * lam, M, S)
            clock.nls += clock.now() - start
            check_finite(H_hat, "NLS", n, it)

            start = clock.now()
            local_sq = column_sq_norms(H_hat)
            clock.gram += clock.now() - start
            sq = yield ctx.all_reduce(local_sq, ALL_PROCS, CommCategory.GRAM)

            start = clock.now()
            sq = guard_dead_columns(H_hat, sq, _real_rows(ctx.owned_rows[n - 1], dims[n - 1]), dims[n - 1])
            H, lam = finish_normalization(H_hat, sq)
            local_gram = gram(H)
            clock.gram += clock.now() - start
            G = (yield ctx.all_reduce(local_gram, ALL_PROCS, CommCategory.GRAM)).reshape(rank, rank)
            check_finite(G, "Gram", n, it)

            ctx.owned[n - 1] = H
            ctx.grams[n - 1] = G
            slab = yield from _gather_slab(ctx, n, CommCategory.FACTOR)
            engine.set_factor(n, slab)

            if n == ndims:
                local_inner = inner_product(M, H_hat)
                inner = float((yield ctx.all_reduce(np.array([local_inner]), ALL_PROCS, CommCategory.GRAM))[0])
                start = clock.now()
                acc = ErrorAccumulators(a_sq=a_sq, inner_prod=inner, model_sq=model_norm_sq(lam, S, G))
                eps = relative_error(acc)
                clock.err += clock.now() - start
                check_finite(np.array([eps]), "Error", n, it)

        records.append(ledger_record(it, eps, flops, before, clock))
        history.append(eps)
        if ctx.rank == 0:
            logger.debug(f"iteration {it}: eps={eps:.3e}", extra={"iteration": it, "eps": eps})
        if converged(history, config.tolerance):
            break

    return {"owned": ctx.owned, "lam": lam, "records": records}


def par_nncp(
    tensor: DenseTensor,
    grid: Union[ProcessGrid, Sequence[int]],
    config: NncpConfig,
    pad: bool = False,
    worker_mode: WorkerMode = WorkerMode.SIM,
    cost_model: Optional[CostModel] = None,
    init: Optional[KruskalModel] = None,
) -> Tuple[KruskalModel, IterationTrace, CommLedger]:
    """
    Nonnegative CP decomposition on a virtual P_1 x ... x P_N grid.

    Args:
        tensor: Input tensor, N >= 2
        grid: Processor grid (or its extents), one extent per tensor mode
        config: Same configuration as the sequential driver
        pad: Zero-pad modes whose extent the grid does not divide
        worker_mode: sim (single thread) or threads (one per worker)
        cost_model: Alpha-beta parameters for the trace's predicted comm times
        init: Optional starting model

    Returns:
        (KruskalModel, IterationTrace with comm columns, CommLedger)

    Raises:
        GridError / DistributionError: If the grid does not fit the tensor
        ReplicationError: If slice members ever hold different slabs
        ZeroTensorError, NonFiniteIterateError, NlsConvergenceError: As in nncp

    Example:
        model, trace, ledger = par_nncp(tensor, (2, 2, 2), NncpConfig(rank=2, max_outer_iters=10))
    """
    if tensor.ndims < 2:
        raise TensorShapeError("NNCP needs a tensor with at least two modes")
    grid = grid if isinstance(grid, ProcessGrid) else ProcessGrid(grid)
    cost_model = cost_model or CostModel()
    rank = config.rank
    ndims = tensor.ndims

    full_dims = padded_dims(tensor.dims, grid, pad)
    blocks = distribute_tensor(tensor, grid, pad)
    factors = initial_factors(tensor.dims, rank, config.seed, init)
    padded_factors = []
    for H, extent in zip(factors, full_dims):
        padded = np.zeros((extent, rank))
        padded[: H.shape[0]] = H
        padded_factors.append(padded)

    workers, fabric = spawn_grid(grid)
    for ctx in workers:
        ctx.local = blocks[ctx.rank]
        ctx.assign_rows(full_dims)
        ctx.owned = [np.ascontiguousarray(padded_factors[n][a:b]) for n, (a, b) in enumerate(ctx.owned_rows)]
        ctx.slabs = [None] * ndims
        ctx.grams = [None] * ndims

    logger.info(
        f"Par-NNCP start: dims={tensor.dims} grid={grid.label} R={rank} mode={worker_mode.value}",
        extra={"dims": list(tensor.dims), "grid": grid.label, "rank": rank, "workers": grid.size},
    )
    results = fabric.run([worker_program(ctx, config, tensor.dims) for ctx in workers], worker_mode)

    model_factors = []
    for n in range(1, ndims + 1):
        H = np.zeros((full_dims[n - 1], rank))
        for ctx, result in zip(workers, results):
            a, b = ctx.owned_rows[n - 1]
            H[a:b] = result["owned"][n - 1]
        model_factors.append(np.ascontiguousarray(H[: tensor.dims[n - 1]]))
    model = KruskalModel(factors=model_factors, weights=results[0]["lam"])

    trace = IterationTrace()
    for record in results[0]["records"]:
        comm = iteration_comm(fabric.ledger, grid, record.iter, cost_model)
        trace.append(record.model_copy(update={
            "t_factor_comm": comm["factor"]["seconds"],
            "t_gram_comm": comm["gram"]["seconds"],
            "words_factor": comm["factor"]["words"],
            "words_gram": comm["gram"]["words"],
        }))

    logger.info(
        f"Par-NNCP finished after {len(trace)} iterations, eps={trace.final_eps:.3e}",
        extra={"iterations": len(trace), "eps": trace.final_eps, "collectives": len(fabric.ledger)},
    )
    return model, trace, fabric.ledger
