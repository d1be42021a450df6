"""
Tests for settings, the run journal and Sentry helpers.

Run tests:
    pytest tests/core/test_core.py -v
"""

import json

import numpy as np

from parnncp.core.config import Settings, settings
from parnncp.core.run_logger import RUN_LOG_FILENAME, get_run_stats, log_run
from parnncp.core.sentry import MAX_PAYLOAD_ITEMS, capture_run_error, init_sentry, scrub_numeric_payloads
from parnncp.modules.driver.errors import NonFiniteIterateError


class TestSettings:
    """Test defaults and environment overrides."""

    def test_defaults(self):
        """Test solver and cost defaults."""
        fresh = Settings(_env_file=None)
        assert fresh.ZERO_COLUMN_GUARD == 1e-16
        assert fresh.DEFAULT_NLS_METHOD == "bpp"
        assert fresh.bpp_iteration_limit(4) == 60

    def test_environment_override(self, monkeypatch):
        """Test that environment variables win over defaults."""
        monkeypatch.setenv("COST_ALPHA", "0.5")
        monkeypatch.setenv("DEFAULT_RANK", "3")
        fresh = Settings(_env_file=None)
        assert fresh.COST_ALPHA == 0.5
        assert fresh.DEFAULT_RANK == 3

    def test_is_production(self):
        """Test the environment check."""
        assert Settings(_env_file=None, ENVIRONMENT="Production").is_production


class TestRunJournal:
    """Test the JSONL run journal."""

    def test_appends_one_line_per_run(self, tmp_path):
        """Test timestamped entries in runs.jsonl."""
        log_run({"rank": 2, "nls": "bpp", "final_eps": 0.5}, log_dir=str(tmp_path))
        log_run({"rank": 2, "nls": "hals", "final_eps": 0.25}, log_dir=str(tmp_path))
        lines = (tmp_path / RUN_LOG_FILENAME).read_text().splitlines()
        assert len(lines) == 2
        entry = json.loads(lines[0])
        assert entry["timestamp"].endswith("Z")
        assert entry["rank"] == 2

    def test_disabled(self, tmp_path, monkeypatch):
        """Test that nothing is written when the journal is off."""
        monkeypatch.setattr(settings, "RUN_LOG_ENABLED", False)
        assert log_run({"rank": 1}, log_dir=str(tmp_path)) is False
        assert not (tmp_path / RUN_LOG_FILENAME).exists()

    def test_stats(self, tmp_path):
        """Test totals, per-method counts and best error per rank."""
        for rank, nls, eps in [(2, "bpp", 0.5), (2, "hals", 0.25), (4, "bpp", 0.125)]:
            log_run({"rank": rank, "nls": nls, "final_eps": eps}, log_dir=str(tmp_path))
        stats = get_run_stats(log_dir=str(tmp_path))
        assert stats["total"] == 3
        assert stats["by_nls"] == {"bpp": 2, "hals": 1}
        assert stats["best_eps_by_rank"] == {2: 0.25, 4: 0.125}
        assert stats["mean_final_eps"] == (0.5 + 0.25 + 0.125) / 3

    def test_stats_skip_corrupt_lines(self, tmp_path):
        """Test that unparsable lines are ignored."""
        (tmp_path / RUN_LOG_FILENAME).write_text('{"rank": 1, "nls": "bpp"}\nnot json\n')
        assert get_run_stats(log_dir=str(tmp_path))["total"] == 1

    def test_stats_without_journal(self, tmp_path):
        """Test empty stats when no run was logged."""
        assert get_run_stats(log_dir=str(tmp_path / "none"))["total"] == 0


class TestSentry:
    """Test Sentry setup and payload scrubbing."""

    def test_no_dsn_disables(self, monkeypatch):
        """Test that init is skipped without a DSN."""
        monkeypatch.setattr(settings, "SENTRY_DSN", None)
        assert init_sentry() is False

    def test_init_with_dsn(self, mocker):
        """Test that a DSN initializes the SDK with the scrubber."""
        sdk_init = mocker.patch("parnncp.core.sentry.sentry_sdk.init")
        assert init_sentry("https://key@example.invalid/1") is True
        kwargs = sdk_init.call_args.kwargs
        assert kwargs["before_send"] is scrub_numeric_payloads
        assert kwargs["send_default_pii"] is False

    def test_scrub_arrays_and_long_lists(self):
        """Test that buffers become shape summaries."""
        event = {
            "extra": {
                "rows": list(range(MAX_PAYLOAD_ITEMS + 1)),
                "factor": np.zeros((4, 3)),
                "rank": 3,
            }
        }
        scrubbed = scrub_numeric_payloads(event, None)
        assert scrubbed["extra"]["rows"] == f"[{MAX_PAYLOAD_ITEMS + 1} items truncated]"
        assert scrubbed["extra"]["factor"] == "<array shape=(4, 3) dtype=float64>"
        assert scrubbed["extra"]["rank"] == 3

    def test_capture_run_error(self, mocker):
        """Test that the error goes to Sentry with scrubbed context."""
        capture = mocker.patch("parnncp.core.sentry.sentry_sdk.capture_exception")
        error = NonFiniteIterateError("NLS", mode=2, iteration=5)
        capture_run_error(error, {"rank": 4, "buffer": np.ones(3)})
        args, kwargs = capture.call_args
        assert args[0] is error
        assert kwargs["extras"]["buffer"] == "<array shape=(3,) dtype=float64>"
