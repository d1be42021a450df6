"""
Sentry initialization and error monitoring configuration.

Captures:
- Python exceptions raised by CLI runs
- Driver failures (non-finite iterates, solver non-convergence)
- ERROR-level log records

Context enrichment:
- Run parameters (rank, nls method, grid)
- Environment and release version
"""

import logging
from typing import Any, Optional

import sentry_sdk
from sentry_sdk.integrations.logging import LoggingIntegration

from parnncp import __version__
from parnncp.core.config import settings

logger = logging.getLogger(__name__)

# Lists longer than this are replaced by a short summary before sending.
MAX_PAYLOAD_ITEMS = 32


def init_sentry(dsn: Optional[str] = None) -> bool:
    """
    Initialize Sentry error monitoring.

    Only initializes if a DSN is given or SENTRY_DSN is configured.

    Args:
        dsn: Explicit DSN (defaults to settings.SENTRY_DSN)

    Returns:
        True if Sentry was initialized
    """
    dsn = dsn or settings.SENTRY_DSN
    if not dsn:
        logger.debug("Sentry DSN not configured - error monitoring disabled")
        return False

    sentry_sdk.init(
        dsn=dsn,
        environment=settings.ENVIRONMENT,
        release=f"parnncp@{__version__}",
        integrations=[
            LoggingIntegration(
                level=logging.INFO,  # Breadcrumbs from info and above
                event_level=logging.ERROR,  # Send errors to Sentry
            ),
        ],
        traces_sample_rate=0.0,
        sample_rate=1.0,
        send_default_pii=False,
        max_breadcrumbs=50,
        before_send=scrub_numeric_payloads,
    )

    logger.info(f"Sentry initialized - environment: {settings.ENVIRONMENT}")
    return True


def _summarize(value: Any) -> Any:
    """Replace large sequences with a short description, recursively."""
    if isinstance(value, dict):
        return {k: _summarize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        if len(value) > MAX_PAYLOAD_ITEMS:
            return f"[{len(value)} items truncated]"
        return [_summarize(v) for v in value]
    if hasattr(value, "shape") and hasattr(value, "dtype"):
        return f"<array shape={tuple(value.shape)} dtype={value.dtype}>"
    return value


def scrub_numeric_payloads(event: dict, hint: Optional[dict]) -> dict:
    """
    Truncate tensor and factor payloads before sending to Sentry.

    Driver errors may carry factor rows or whole buffers in their context;
    only shapes and short values are worth sending.

    Args:
        event: Sentry event dict
        hint: Additional context

    Returns:
        Modified event
    """
    for key in ("extra", "contexts"):
        if event.get(key):
            event[key] = _summarize(event[key])
    return event


def capture_run_error(error: Exception, context: dict, level: str = "error") -> None:
    """
    Capture a decomposition failure with run context.

    Args:
        error: The exception that occurred
        context: Dict with run context (rank, nls, grid, input)
        level: Sentry level (info, warning, error, fatal)

    Example:
        capture_run_error(
            error=e,
            context={"rank": 8, "nls": "bpp", "grid": "2x2x2"},
        )
    """
    safe_context = _summarize(context)

    sentry_sdk.capture_exception(error, level=level, extras=safe_context)

    logger.error(
        f"Run error captured: {error}",
        extra={"run_context": safe_context},
    )
