"""
Flop and phase-time accounting for MTTKRP kernels.

Counts are analytic (derived from operand shapes), so they are exact and
independent of the BLAS underneath.
"""

import math
import time
from contextlib import contextmanager
from typing import Dict, Iterator, List, Sequence

from parnncp.modules.tensor.kernels import khatri_rao_flops

PARTIAL_MTTKRP = "partial_mttkrp"
MULTI_TTV = "multi_ttv"
KRP = "krp"
NAIVE_MTTKRP = "naive_mttkrp"

PHASES = (PARTIAL_MTTKRP, MULTI_TTV, KRP, NAIVE_MTTKRP)


class FlopLedger:
    """
    Monotone flop counters and phase timers.

    Counters only grow; reset() is the only way back to zero.

    Usage:
        ledger = FlopLedger()
        with ledger.timed(KRP):
            K = khatri_rao(mats)
        ledger.add(KRP, khatri_rao_flops(rows, R))
    """

    def __init__(self):
        self.flops: Dict[str, int] = dict.fromkeys(PHASES, 0)
        self.seconds: Dict[str, float] = dict.fromkeys(PHASES, 0.0)
        self.temporary_allocations: List[int] = []

    def add(self, phase: str, flops: int) -> None:
        if phase not in self.flops:
            raise KeyError(f"unknown phase {phase!r}")
        if flops < 0:
            raise ValueError("flop counts only increase")
        self.flops[phase] += int(flops)

    @contextmanager
    def timed(self, phase: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.seconds[phase] += time.perf_counter() - start

    def record_allocation(self, words: int) -> None:
        self.temporary_allocations.append(int(words))

    def snapshot(self) -> Dict[str, Dict[str, float]]:
        return {"flops": dict(self.flops), "seconds": dict(self.seconds)}

    def reset(self) -> None:
        self.flops = dict.fromkeys(PHASES, 0)
        self.seconds = dict.fromkeys(PHASES, 0.0)

    def __repr__(self):
        return f"<FlopLedger {self.flops}>"


def naive_sweep_flops(dims: Sequence[int], rank: int) -> int:
    """Leading flops of N full MTTKRPs: 2 * N * I * R."""
    return 2 * len(dims) * math.prod(dims) * rank


def sweep_flop_model(tree, rank: int) -> Dict[str, int]:
    """
    Per-sweep flops implied by a dimension tree.

    Every non-root node is computed exactly once per sweep: root children by
    a partial MTTKRP over the whole tensor, deeper nodes by a multi-TTV over
    their parent's temporary. Each also needs the KRP of its sibling's modes.
    """
    dims = tree.dims
    total = math.prod(dims)
    model = {PARTIAL_MTTKRP: 0, MULTI_TTV: 0, KRP: 0}
    for node in tree.nodes:
        if node.parent is None:
            continue
        sibling = node.sibling
        model[KRP] += khatri_rao_flops([dims[m - 1] for m in sibling.modes], rank)
        if node.parent.parent is None:
            model[PARTIAL_MTTKRP] += 2 * total * rank
        else:
            model[MULTI_TTV] += 2 * node.parent.size(dims) * rank
    return model
