"""Configuration loading and validation utilities."""

from .settings import AppSettings, PlannerSettings, SamplingSettings, load_settings

__all__ = ["AppSettings", "PlannerSettings", "SamplingSettings", "load_settings"]
