"""Utility helpers shared across the codebase."""

from .io import ensure_directory, read_json, write_json

__all__ = ["ensure_directory", "read_json", "write_json"]
