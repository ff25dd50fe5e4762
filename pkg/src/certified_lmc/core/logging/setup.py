"""Structured logging helpers for samplers, planners and the CLI."""

import sys

from loguru import logger

_FORMAT = (
    "<green>{time:HH:mm:ss.SSS}</green> | <level>{level: <8}</level> | "
    "<cyan>{extra[name]}</cyan> - <level>{message}</level>"
)


def configure_logging(debug: bool = False, level: str | None = None) -> None:
    """Configure loguru-based logging."""
    logger.remove()
    resolved = "DEBUG" if debug else (level or "INFO")
    logger.configure(extra={"name": "certified_lmc"})
    logger.add(sys.stderr, level=resolved, format=_FORMAT)


def get_logger(name: str):  # type: ignore[no-untyped-def]
    """Acquire a configured logger instance."""
    return logger.bind(name=name)
