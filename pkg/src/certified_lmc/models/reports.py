"""Report models emitted by the diagnostics."""

from __future__ import annotations

from typing import Dict, List, Optional

from pydantic import BaseModel, Field, computed_field, field_validator


class MarginalSummaryDistances(BaseModel):
    """Normalised L1 distances between coordinate-wise summaries of two sample sets."""

    d_mean: float
    d_median: float
    d_Q1: float
    d_Q3: float

    @field_validator("d_mean", "d_median", "d_Q1", "d_Q3")
    @classmethod
    def _validate_nonnegative(cls, value: float) -> float:
        if value < 0.0:
            raise ValueError("distances are nonnegative")
        return float(value)

    def max(self) -> float:
        return max(self.d_mean, self.d_median, self.d_Q1, self.d_Q3)


class MomentReport(BaseModel):
    """Coordinates whose empirical mean or covariance misses the reference."""

    n: int
    z_threshold: float = 4.0
    flagged_means: List[int] = Field(default_factory=list)
    flagged_covariances: List[List[int]] = Field(default_factory=list)
    worst_z: float = 0.0

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        return not self.flagged_means and not self.flagged_covariances


class EnergyBoundReport(BaseModel):
    """Empirical mean squared distance to the mode against the chain-moment bound."""

    bound: float
    empirical_mean: float
    standard_error: float
    margin: float
    passed: bool


class KSReport(BaseModel):
    """Kolmogorov-Smirnov distance of a projection with its acceptance threshold."""

    distance: float
    threshold: Optional[float] = None
    n: int

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        return self.threshold is None or self.distance <= self.threshold


class DiagnosticReport(BaseModel):
    """Bundle of checks run by the diagnose command."""

    samples: str
    ks: Optional[KSReport] = None
    moments: Optional[MomentReport] = None
    distances: Optional[MarginalSummaryDistances] = None
    distance_threshold: Optional[float] = None
    notes: Dict[str, str] = Field(default_factory=dict)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        checks = []
        if self.ks is not None:
            checks.append(self.ks.passed)
        if self.moments is not None:
            checks.append(self.moments.passed)
        if self.distances is not None and self.distance_threshold is not None:
            checks.append(self.distances.max() <= self.distance_threshold)
        return all(checks)
