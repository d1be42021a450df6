"""
Run journal for decomposition runs.

Logs every CLI run to a structured JSONL file for:
- Comparing NLS methods and ranks across runs
- Tracking the final relative error per configuration
- Spotting regressions in per-phase time
"""

import json
import logging
from collections import defaultdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional

from parnncp.core.config import settings

logger = logging.getLogger(__name__)

RUN_LOG_FILENAME = "runs.jsonl"


def get_run_log_file(log_dir: Optional[str] = None) -> Path:
    """Path of the journal file (directory created on demand)."""
    directory = Path(log_dir or settings.RUN_LOG_DIR)
    directory.mkdir(parents=True, exist_ok=True)
    return directory / RUN_LOG_FILENAME


def log_run(summary: Dict[str, Any], log_dir: Optional[str] = None) -> bool:
    """
    Append one run summary to the journal.

    Creates one JSON object per line (JSONL format) for easy parsing.

    Args:
        summary: Run summary (rank, nls, grid, iterations, final_eps, phases)
        log_dir: Journal directory (defaults to settings.RUN_LOG_DIR)

    Returns:
        True if the entry was written

    File format (one JSON object per line):
    {
        "timestamp": "2026-01-04T12:34:56Z",
        "input": "synthetic:32x32x32:r4:s7",
        "rank": 4,
        "nls": "bpp",
        "grid": "2x2x2",
        "iterations": 50,
        "final_eps": 0.00042,
        "phases": {"MTTKRP": 0.81, "KRP": 0.02, "NLS": 0.11, ...}
    }
    """
    if not settings.RUN_LOG_ENABLED:
        return False

    entry = {"timestamp": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z")}
    entry.update(summary)

    try:
        with open(get_run_log_file(log_dir), "a") as f:
            f.write(json.dumps(entry) + "\n")
        return True
    except Exception as e:
        # Don't fail the run if the journal can't be written
        logger.error(f"Failed to log run: {e}")
        return False


def get_run_stats(log_dir: Optional[str] = None) -> dict:
    """
    Summarize the run journal.

    Returns:
        Dict with:
        - total: number of runs
        - by_nls: run count per NLS method
        - mean_final_eps: mean final relative error
        - best_eps_by_rank: lowest final error seen per rank

    Usage:
        stats = get_run_stats()
        print(f"Best rank-8 error: {stats['best_eps_by_rank'].get(8)}")
    """
    empty = {"total": 0, "by_nls": {}, "mean_final_eps": 0.0, "best_eps_by_rank": {}}
    path = Path(log_dir or settings.RUN_LOG_DIR) / RUN_LOG_FILENAME
    if not path.exists():
        return empty

    total = 0
    by_nls: Dict[str, int] = defaultdict(int)
    eps_values = []
    best_by_rank: Dict[int, float] = {}

    try:
        with open(path, "r") as f:
            for line in f:
                try:
                    entry = json.loads(line)
                except json.JSONDecodeError:
                    continue

                total += 1
                by_nls[entry.get("nls", "unknown")] += 1

                eps = entry.get("final_eps")
                if eps is None:
                    continue
                eps_values.append(eps)
                rank = entry.get("rank")
                if rank is not None and (rank not in best_by_rank or eps < best_by_rank[rank]):
                    best_by_rank[rank] = eps
    except Exception as e:
        logger.error(f"Failed to read run stats: {e}")
        return empty

    return {
        "total": total,
        "by_nls": dict(by_nls),
        "mean_final_eps": sum(eps_values) / len(eps_values) if eps_values else 0.0,
        "best_eps_by_rank": best_by_rank,
    }
