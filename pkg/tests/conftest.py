"""Shared fixtures."""

import numpy as np
import pytest

from parnncp.core.config import settings
from parnncp.modules.tensor.dense import DenseTensor


@pytest.fixture
def rng():
    """Seeded generator so every test sees the same draws."""
    return np.random.default_rng(20240601)


@pytest.fixture
def ones_222():
    """2x2x2 all-ones tensor."""
    return DenseTensor.from_array(np.ones((2, 2, 2)))


@pytest.fixture
def counting_222():
    """2x2x2 tensor holding 1..8 in storage order."""
    return DenseTensor((2, 2, 2), np.arange(1.0, 9.0))


@pytest.fixture(autouse=True)
def run_journal_in_tmp(tmp_path, monkeypatch):
    """Keep the run journal out of the working tree."""
    monkeypatch.setattr(settings, "RUN_LOG_DIR", str(tmp_path / "logs"))
