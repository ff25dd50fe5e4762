"""High-level service layer coordinating experiment workflows."""

from .experiments import ExperimentService

__all__ = ["ExperimentService"]
