"""
Communication ledger and alpha-beta cost model.

A ledger entry is written once per collective call per subgroup, with the
model-level payload size W (float64 words) and the subgroup size P'.
"""

import math
from enum import Enum
from typing import Iterable, List, Optional, Set

from pydantic import BaseModel, Field

from parnncp.core.config import settings


class CollectiveKind(str, Enum):
    """
    Collectives supported by the fabric.

    VERIFY is a replication check rendezvous; it moves no data and is
    never recorded.
    """
    ALL_REDUCE = "AR"
    REDUCE_SCATTER = "RS"
    ALL_GATHER = "AG"
    VERIFY = "VERIFY"


class CommCategory(str, Enum):
    """Phase a collective is charged to in traces."""
    SETUP = "setup"
    FACTOR = "factor"
    GRAM = "gram"


def ceil_log2(p: int) -> int:
    """log2 of the group size, rounded up (0 for a group of one)."""
    return math.ceil(math.log2(p)) if p > 1 else 0


class CommRecord(BaseModel):
    """One collective call on one subgroup."""
    iteration: int = Field(..., ge=0, description="Outer iteration (0 = setup)")
    kind: CollectiveKind
    group_size: int = Field(..., ge=1)
    words: int = Field(..., ge=0, description="Model-level payload W")
    subgroup: str
    category: CommCategory = CommCategory.FACTOR
    call: int = Field(0, ge=0, description="Sequence number of the call within its subgroup")

    @property
    def bandwidth_words(self) -> float:
        """Words each member sends under the bandwidth-optimal algorithms."""
        share = self.words * (self.group_size - 1) / self.group_size
        return 2.0 * share if self.kind == CollectiveKind.ALL_REDUCE else share


class CostModel(BaseModel):
    """
    Alpha-beta model: a message costs alpha plus beta per word.

    Example:
        CostModel(alpha=1.0, beta=0.1).collective_time(CollectiveKind.ALL_REDUCE, 8, 4)  # 5.2
    """
    alpha: float = Field(default_factory=lambda: settings.COST_ALPHA, ge=0.0, description="Latency per message (s)")
    beta: float = Field(default_factory=lambda: settings.COST_BETA, ge=0.0, description="Transfer time per word (s)")

    def collective_time(self, kind: CollectiveKind, words: int, group_size: int) -> float:
        """Predicted seconds for one collective of W words over P' members."""
        if kind == CollectiveKind.VERIFY:
            return 0.0
        latency = self.alpha * ceil_log2(group_size)
        bandwidth = self.beta * words * (group_size - 1) / group_size
        if kind == CollectiveKind.ALL_REDUCE:
            return 2.0 * latency + 2.0 * bandwidth
        return latency + bandwidth


class CommLedger(BaseModel):
    """
    Recorded collective traffic of a run.

    Usage:
        ledger.words_per_iteration(3, subgroups=worker0_groups)
        predicted_time(ledger.records, CostModel())
    """
    records: List[CommRecord] = Field(default_factory=list)

    def record(self, entry: CommRecord) -> None:
        self.records.append(entry)

    def ordered(self) -> List[CommRecord]:
        """Records in a scheduling-independent order (iteration, call, subgroup)."""
        return sorted(self.records, key=lambda r: (r.iteration, r.call, r.subgroup))

    def __len__(self) -> int:
        return len(self.records)

    def select(
        self,
        iteration: Optional[int] = None,
        subgroups: Optional[Set[str]] = None,
        category: Optional[CommCategory] = None,
    ) -> List[CommRecord]:
        return [
            r for r in self.records
            if (iteration is None or r.iteration == iteration)
            and (subgroups is None or r.subgroup in subgroups)
            and (category is None or r.category == category)
        ]

    def words_per_iteration(self, iteration: int, subgroups: Set[str]) -> float:
        """Bandwidth words moved by one worker (given its groups) in one iteration."""
        return measured_words(self.select(iteration=iteration, subgroups=subgroups))


def measured_words(records: Iterable[CommRecord]) -> float:
    return sum(r.bandwidth_words for r in records)


def predicted_time(records: Iterable[CommRecord], cost_model: CostModel) -> float:
    """Sum of the alpha-beta cost of every given entry."""
    return sum(cost_model.collective_time(r.kind, r.words, r.group_size) for r in records)
