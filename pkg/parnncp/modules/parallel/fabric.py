"""
Communication fabric for virtual workers.

Worker programs are generators. Each collective is a CollectiveRequest the
program yields; the fabric sends back that member's result:

    total = yield ctx.all_reduce(local, ALL_PROCS, CommCategory.GRAM)

A request is matched with the other members' requests by
(subgroup, call), where call counts the worker's collectives on that
subgroup. One resolver serves both execution modes:

- sim: a single thread steps every worker to its next collective and
  resolves each group once all members have arrived
- threads: one thread per worker; the last member to arrive resolves the
  group while the others wait on a condition variable

Because the resolver sees the same buffers in the same member order either
way, both modes produce bitwise-identical results.
"""

import logging
import threading
from collections import defaultdict
from typing import Any, Dict, Generator, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from parnncp.models.comm import CollectiveKind, CommCategory, CommLedger, CommRecord
from parnncp.models.config import WorkerMode
from parnncp.modules.parallel.collectives import (
    all_gather,
    all_reduce,
    reduce_scatter,
    verify_identical,
)
from parnncp.modules.parallel.errors import CollectiveError, ReplicationError
from parnncp.modules.parallel.grid import ProcessGrid

logger = logging.getLogger(__name__)

# Seconds a thread-mode worker waits inside one collective before giving up
RENDEZVOUS_TIMEOUT = 120.0

WorkerProgram = Generator["CollectiveRequest", Any, Any]


class CollectiveRequest(BaseModel):
    """One member's side of a collective call."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    kind: CollectiveKind
    subgroup: str
    call: int = Field(..., ge=0)
    payload: np.ndarray
    partition: Optional[List[int]] = Field(None, description="Per-member sizes (RS, AG)")
    category: CommCategory = CommCategory.FACTOR
    iteration: int = 0


class Fabric:
    """
    Resolves collectives for a grid and records them in a CommLedger.

    Usage:
        fabric = Fabric(grid)
        results = fabric.run(programs, WorkerMode.SIM)
        fabric.ledger.records
    """

    def __init__(self, grid: ProcessGrid, ledger: Optional[CommLedger] = None):
        self.grid = grid
        self.ledger = ledger if ledger is not None else CommLedger()

    def resolve(self, requests: Dict[int, CollectiveRequest]) -> Dict[int, Any]:
        """
        Complete one collective given every member's request.

        Raises:
            CollectiveError: On mismatched kinds, lengths or partitions
            ReplicationError: If a VERIFY finds differing buffers
        """
        first = next(iter(requests.values()))
        members = self.grid.members(first.subgroup)
        if sorted(requests) != members:
            raise CollectiveError(f"{first.subgroup}: members {sorted(requests)} != {members}")
        ordered = [requests[rank] for rank in members]
        kinds = {r.kind for r in ordered}
        if len(kinds) != 1:
            raise CollectiveError(f"{first.subgroup} call {first.call}: mixed kinds {sorted(k.value for k in kinds)}")

        payloads = [r.payload for r in ordered]
        kind = first.kind
        if kind == CollectiveKind.VERIFY:
            if not verify_identical(payloads):
                raise ReplicationError(
                    f"{first.subgroup}: replicated factor slabs differ (iteration {first.iteration})"
                )
            return {rank: None for rank in members}

        if kind == CollectiveKind.ALL_REDUCE:
            outputs = all_reduce(payloads)
            words = outputs[0].size
        elif kind == CollectiveKind.REDUCE_SCATTER:
            outputs = reduce_scatter(payloads, self._partition(ordered))
            words = int(np.asarray(payloads[0]).size)
        else:
            outputs = all_gather(payloads, self._partition(ordered))
            words = outputs[0].size

        self.ledger.record(CommRecord(
            iteration=first.iteration,
            kind=kind,
            group_size=len(members),
            words=words,
            subgroup=first.subgroup,
            category=first.category,
            call=first.call,
        ))
        return dict(zip(members, outputs))

    @staticmethod
    def _partition(ordered: Sequence[CollectiveRequest]) -> List[int]:
        partition = ordered[0].partition
        if partition is None or any(r.partition != partition for r in ordered):
            raise CollectiveError(f"{ordered[0].subgroup}: members disagree on the partition")
        return partition

    def run(self, programs: Sequence[WorkerProgram], mode: WorkerMode = WorkerMode.SIM) -> List[Any]:
        """Execute one program per rank; returns each program's return value."""
        if len(programs) != self.grid.size:
            raise CollectiveError(f"{len(programs)} programs for {self.grid.size} workers")
        if mode == WorkerMode.THREADS:
            return run_threads(self, programs)
        return run_sim(self, programs)


def run_sim(fabric: Fabric, programs: Sequence[WorkerProgram]) -> List[Any]:
    """Bulk-synchronous execution on the calling thread."""
    pending: Dict[int, CollectiveRequest] = {}
    results: Dict[int, Any] = {}

    def advance(rank: int, value: Any) -> None:
        try:
            pending[rank] = programs[rank].send(value)
        except StopIteration as stop:
            results[rank] = stop.value

    for rank in range(len(programs)):
        advance(rank, None)

    while pending:
        groups: Dict[Tuple[str, int], Dict[int, CollectiveRequest]] = defaultdict(dict)
        for rank, request in pending.items():
            groups[(request.subgroup, request.call)][rank] = request

        progressed = False
        for key in sorted(groups, key=lambda k: (k[1], k[0])):
            arrived = groups[key]
            if len(arrived) != len(fabric.grid.members(key[0])):
                continue
            outputs = fabric.resolve(arrived)
            for rank in arrived:
                del pending[rank]
            for rank in sorted(arrived):
                advance(rank, outputs[rank])
            progressed = True

        if not progressed:
            waiting = sorted(f"{k[0]}#{k[1]}" for k in groups)
            raise CollectiveError(f"deadlock: no collective can complete (waiting on {waiting})")

    return [results[rank] for rank in range(len(programs))]


class _Rendezvous:
    """Per-(subgroup, call) meeting point for thread-mode workers."""

    def __init__(self, fabric: Fabric):
        self.fabric = fabric
        self.cond = threading.Condition()
        self.slots: Dict[Tuple[str, int], dict] = {}
        self.failure: Optional[BaseException] = None

    def abort(self, error: BaseException) -> None:
        with self.cond:
            if self.failure is None:
                self.failure = error
            self.cond.notify_all()

    def exchange(self, rank: int, request: CollectiveRequest) -> Any:
        key = (request.subgroup, request.call)
        size = len(self.fabric.grid.members(request.subgroup))
        with self.cond:
            slot = self.slots.setdefault(key, {"requests": {}, "results": None, "error": None, "taken": 0})
            slot["requests"][rank] = request
            if len(slot["requests"]) == size:
                try:
                    slot["results"] = self.fabric.resolve(slot["requests"])
                except Exception as e:
                    slot["error"] = e
                self.cond.notify_all()
            else:
                while slot["results"] is None and slot["error"] is None:
                    if self.failure is not None:
                        raise CollectiveError(f"rank {rank}: another worker failed") from self.failure
                    if not self.cond.wait(timeout=RENDEZVOUS_TIMEOUT):
                        raise CollectiveError(f"rank {rank}: timed out in {key[0]} call {key[1]}")

            slot["taken"] += 1
            if slot["taken"] == size:
                del self.slots[key]
            if slot["error"] is not None:
                raise slot["error"]
            return slot["results"][rank]


def run_threads(fabric: Fabric, programs: Sequence[WorkerProgram]) -> List[Any]:
    """One thread per worker, synchronizing only inside collectives."""
    rendezvous = _Rendezvous(fabric)
    results: List[Any] = [None] * len(programs)
    errors: Dict[int, BaseException] = {}

    def drive(rank: int) -> None:
        program = programs[rank]
        value = None
        try:
            while True:
                request = program.send(value)
                value = rendezvous.exchange(rank, request)
        except StopIteration as stop:
            results[rank] = stop.value
        except BaseException as e:
            errors[rank] = e
            rendezvous.abort(e)

    threads = [
        threading.Thread(target=drive, args=(rank,), name=f"worker-{rank}", daemon=True)
        for rank in range(len(programs))
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    if errors:
        # Prefer the root cause over the "another worker failed" echoes
        ranked = [errors[rank] for rank in sorted(errors)]
        primary = [e for e in ranked if not isinstance(e.__cause__, BaseException)]
        raise (primary or ranked)[0]
    return results
