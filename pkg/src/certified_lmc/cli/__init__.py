"""Command-line interface definitions."""

from .app import app

__all__ = ["app"]
