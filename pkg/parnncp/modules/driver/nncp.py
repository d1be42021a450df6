"""
Sequential NNCP by block coordinate descent.

Outer iteration:

    for n = 1..N:
        M(n) = A_(n) K(n)                  (dimension tree or naive)
        S(n) = *_{m != n} G(m)
        H_hat(n) = NLS(S(n), M(n))         (BPP or one HALS cycle)
        lambda = col_norms(H_hat(n)); H(n) = H_hat(n) / lambda
        G(n) = H(n)^T H(n)
    eps from ||A||^2, <M(N), H_hat(N)> and lambda^T (S(N) * G(N)) lambda

Factors other than the one just updated are always unit-normalized, so
[[lambda; H(1..N)]] is the current iterate at every mode boundary.
"""

import logging
import time
from typing import List, Optional, Tuple

import numpy as np

from parnncp.models.config import NncpConfig
from parnncp.models.trace import ErrorAccumulators, IterationRecord, IterationTrace
from parnncp.modules.driver.error import inner_product, model_norm_sq, relative_error
from parnncp.modules.driver.errors import ZeroTensorError
from parnncp.modules.driver.normalize import column_sq_norms, finish_normalization, guard_dead_columns
from parnncp.modules.driver.steps import check_finite, initial_factors, nls_step
from parnncp.modules.mttkrp.dimtree import DimTreeMttkrp
from parnncp.modules.mttkrp.flops import KRP, MULTI_TTV, NAIVE_MTTKRP, PARTIAL_MTTKRP, FlopLedger
from parnncp.modules.mttkrp.naive import NaiveMttkrp
from parnncp.modules.tensor.dense import DenseTensor, TensorShapeError
from parnncp.modules.tensor.kernels import gram, hadamard_all_but
from parnncp.modules.tensor.kruskal import KruskalModel

logger = logging.getLogger(__name__)


def make_engine(tensor: DenseTensor, rank: int, use_dimension_tree: bool, ledger: FlopLedger):
    if use_dimension_tree:
        return DimTreeMttkrp(tensor, rank, ledger=ledger)
    return NaiveMttkrp(tensor, rank, ledger=ledger)


class PhaseClock:
    """Seconds spent in driver-level phases during one outer iteration."""

    def __init__(self):
        self.nls = 0.0
        self.gram = 0.0
        self.err = 0.0

    @staticmethod
    def now() -> float:
        return time.perf_counter()


def ledger_record(
    iteration: int,
    eps: float,
    ledger: FlopLedger,
    before: dict,
    clock: PhaseClock,
) -> IterationRecord:
    """Trace row from the FlopLedger delta since `before` plus driver timings."""
    after = ledger.snapshot()

    def flops(phase: str) -> int:
        return int(after["flops"][phase] - before["flops"][phase])

    def seconds(phase: str) -> float:
        return float(after["seconds"][phase] - before["seconds"][phase])

    return IterationRecord(
        iter=iteration,
        eps=eps,
        t_pm=seconds(PARTIAL_MTTKRP),
        t_mttv=seconds(MULTI_TTV),
        t_krp=seconds(KRP),
        t_nls=clock.nls,
        t_gram=clock.gram,
        t_err=clock.err,
        flops_pm=flops(PARTIAL_MTTKRP),
        flops_mttv=flops(MULTI_TTV),
        flops_krp=flops(KRP),
        t_naive=seconds(NAIVE_MTTKRP),
        flops_naive=flops(NAIVE_MTTKRP),
    )


def converged(history: List[float], tolerance: float) -> bool:
    """|eps_t - eps_(t-1)| < tolerance; a zero tolerance never converges."""
    if tolerance <= 0.0 or len(history) < 2:
        return False
    return abs(history[-1] - history[-2]) < tolerance


def nncp(
    tensor: DenseTensor,
    config: NncpConfig,
    init: Optional[KruskalModel] = None,
    ledger: Optional[FlopLedger] = None,
) -> Tuple[KruskalModel, IterationTrace]:
    """
    Nonnegative CP decomposition of a dense tensor.

    Args:
        tensor: Input tensor, N >= 2
        config: Rank, iteration limits, NLS method, dimension tree flag, seed
        init: Optional starting model (replaces the seeded random draw)
        ledger: Optional FlopLedger to accumulate into

    Returns:
        (normalized KruskalModel, IterationTrace)

    Raises:
        ZeroTensorError: If the tensor is all zeros
        NonFiniteIterateError: If an iterate becomes NaN/Inf
        NlsConvergenceError: Propagated from BPP

    Example:
        model, trace = nncp(tensor, NncpConfig(rank=4, max_outer_iters=200, tolerance=1e-9))
        print(trace.final_eps)
    """
    if tensor.ndims < 2:
        raise TensorShapeError("NNCP needs a tensor with at least two modes")
    ndims = tensor.ndims
    rank = config.rank
    ledger = ledger or FlopLedger()

    a_sq = tensor.norm_squared()
    if a_sq == 0.0:
        raise ZeroTensorError("cannot decompose an all-zero tensor")

    factors = initial_factors(tensor.dims, rank, config.seed, init)
    engine = make_engine(tensor, rank, config.use_dimension_tree, ledger)
    grams: List[Optional[np.ndarray]] = [None] * ndims
    for n in range(2, ndims + 1):
        engine.set_factor(n, factors[n - 1])
        grams[n - 1] = gram(factors[n - 1])
    lam = np.ones(rank)

    logger.info(
        f"NNCP start: dims={tensor.dims} R={rank} nls={config.nls_method.value}",
        extra={"dims": list(tensor.dims), "rank": rank, "nls": config.nls_method.value,
               "dimtree": config.use_dimension_tree},
    )

    trace = IterationTrace()
    for it in range(1, config.max_outer_iters + 1):
        before = ledger.snapshot()
        clock = PhaseClock()
        eps = 0.0

        for n in range(1, ndims + 1):
            M = engine.mttkrp(n)
            check_finite(M, "MTTKRP", n, it)

            start = clock.now()
            S = hadamard_all_but(grams, n)
            H_hat = nls_step(config.nls_method, factors[n - 1] * lam, M, S)
            clock.nls += clock.now() - start
            check_finite(H_hat, "NLS", n, it)

            start = clock.now()
            rows = tensor.dims[n - 1]
            sq = guard_dead_columns(H_hat, column_sq_norms(H_hat), rows, rows)
            H, lam = finish_normalization(H_hat, sq)
            G = gram(H)
            clock.gram += clock.now() - start
            check_finite(G, "Gram", n, it)

            factors[n - 1] = H
            grams[n - 1] = G
            engine.set_factor(n, H)

            if n == ndims:
                start = clock.now()
                acc = ErrorAccumulators(
                    a_sq=a_sq,
                    inner_prod=inner_product(M, H_hat),
                    model_sq=model_norm_sq(lam, S, G),
                )
                eps = relative_error(acc)
                clock.err += clock.now() - start
                check_finite(np.array([eps]), "Error", n, it)

        trace.append(ledger_record(it, eps, ledger, before, clock))
        logger.debug(f"iteration {it}: eps={eps:.3e}", extra={"iteration": it, "eps": eps})

        if converged(trace.eps_history(), config.tolerance):
            break

    logger.info(
        f"NNCP finished after {len(trace)} iterations, eps={trace.final_eps:.3e}",
        extra={"iterations": len(trace), "eps": trace.final_eps},
    )
    return KruskalModel(factors=factors, weights=lam), trace
