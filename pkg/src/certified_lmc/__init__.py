"""Langevin Monte Carlo samplers with certified total-variation plans."""

__version__ = "0.1.0"

__all__ = [
    "adapters",
    "cli",
    "core",
    "models",
    "targets",
    "utils",
]
