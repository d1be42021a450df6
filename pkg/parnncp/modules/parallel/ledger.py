"""Ledger views and CSV export."""

import csv
import io
import logging
from pathlib import Path
from typing import Set, Union

from parnncp.models.comm import CommCategory, CommLedger, CostModel, measured_words, predicted_time
from parnncp.modules.parallel.grid import ProcessGrid
from parnncp.modules.tensor.io import atomic_write_text

logger = logging.getLogger(__name__)

LEDGER_COLUMNS = ["iter", "collective", "group_size", "words", "subgroup"]


def critical_groups(grid: ProcessGrid) -> Set[str]:
    """Subgroups of worker 0; all groups run concurrently, so these bound the time."""
    return grid.groups_of(0)


def iteration_comm(ledger: CommLedger, grid: ProcessGrid, iteration: int, cost_model: CostModel) -> dict:
    """Predicted seconds and measured words per category for one outer iteration."""
    groups = critical_groups(grid)
    out = {}
    for category in (CommCategory.FACTOR, CommCategory.GRAM):
        records = ledger.select(iteration=iteration, subgroups=groups, category=category)
        out[category.value] = {
            "seconds": predicted_time(records, cost_model),
            "words": measured_words(records),
        }
    return out


def ledger_to_csv(ledger: CommLedger) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(LEDGER_COLUMNS)
    for r in ledger.ordered():
        writer.writerow([r.iteration, r.kind.value, r.group_size, r.words, r.subgroup])
    return buffer.getvalue()


def write_ledger_csv(path: Union[str, Path], ledger: CommLedger) -> None:
    atomic_write_text(path, ledger_to_csv(ledger))
    logger.info(f"Wrote ledger ({len(ledger)} entries) to {path}", extra={"path": str(path)})
