"""Models describing certified run parameters produced by the planners."""

from __future__ import annotations

import math
from enum import Enum
from typing import Dict, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator


class AlgorithmTag(str, Enum):
    """Planner families, one per guarantee."""

    LMC = "LMC"
    LMC_WARM = "LMC-warm"
    LMC_CONVEXIFIED = "LMC-convexified"
    LMCO = "LMCO"


class SamplerPlan(BaseModel):
    """Horizon, step-size and iteration count certified by one of the TV bounds."""

    model_config = ConfigDict(frozen=True)

    algo: AlgorithmTag
    T: float = Field(gt=0.0)
    h: float = Field(gt=0.0)
    K: int = Field(ge=0)
    alpha: Optional[float] = None
    eps: float
    predicted_tv: Optional[float] = None
    inputs: Dict[str, float] = Field(default_factory=dict)

    @field_validator("alpha")
    @classmethod
    def _validate_alpha(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and value < 1.0:
            raise ValueError("alpha must be at least 1")
        return value

    @property
    def certified(self) -> bool:
        """Whether the stored bound meets the requested precision."""
        return self.predicted_tv is not None and self.predicted_tv <= self.eps * (1.0 + 1e-9)


class WarmStartSpec(BaseModel):
    """Divergence and second moment of an initial law relative to the target."""

    model_config = ConfigDict(frozen=True)

    chi2_bound: float = Field(gt=0.0)
    mu2: float = Field(gt=0.0)

    @field_validator("chi2_bound", "mu2")
    @classmethod
    def _validate_finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("warm start quantities must be finite")
        return value
