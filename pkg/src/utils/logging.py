"""Structured logging configuration using structlog."""

import logging
import sys
import time
from collections.abc import Iterator
from contextlib import contextmanager
from typing import Any

import structlog
from structlog.typing import EventDict, Processor

from src.config.settings import settings


def add_cell_coordinates(logger: Any, method_name: str, event_dict: EventDict) -> EventDict:
    """Flatten a bound grid-cell context into top-level keys."""
    cell = event_dict.pop("cell", None)
    if isinstance(cell, dict):
        for key, value in cell.items():
            event_dict.setdefault(key, value)
    return event_dict


def configure_logging() -> None:
    """Configure structured logging."""
    shared_processors: list[Processor] = [
        structlog.contextvars.merge_contextvars,
        structlog.stdlib.add_log_level,
        structlog.stdlib.add_logger_name,
        structlog.processors.TimeStamper(fmt="iso"),
        add_cell_coordinates,
        structlog.processors.StackInfoRenderer(),
    ]

    if settings.app.log_format == "json":
        processors: list[Processor] = shared_processors + [
            structlog.processors.format_exc_info,
            structlog.processors.JSONRenderer(),
        ]
    else:
        processors = shared_processors + [
            structlog.dev.ConsoleRenderer(colors=False),
        ]

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.stdlib.BoundLogger,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )

    # stdout is reserved for command output
    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=getattr(logging, settings.app.log_level),
    )


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    """Get a configured logger instance."""
    return structlog.get_logger(name)


@contextmanager
def stage_timer(logger: structlog.stdlib.BoundLogger, stage: str, **fields: Any) -> Iterator[dict[str, float]]:
    """
    Time a pipeline stage and log its wall time on exit.

    Yields a dict whose ``ms`` entry is filled in when the block finishes, so
    callers can keep the measurement.
    """
    timing: dict[str, float] = {"ms": 0.0}
    start = time.perf_counter()
    try:
        yield timing
    finally:
        timing["ms"] = (time.perf_counter() - start) * 1000
        logger.info("Stage complete", stage=stage, duration_ms=round(timing["ms"], 2), **fields)
