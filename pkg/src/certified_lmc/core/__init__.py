"""Numerical core, configuration, and shared logic for the sampler toolkit."""

from . import config, errors, logging

__all__ = [
    "config",
    "errors",
    "logging",
]
