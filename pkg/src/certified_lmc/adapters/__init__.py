"""Adapters responsible for file formats."""

__all__ = ["csv"]
