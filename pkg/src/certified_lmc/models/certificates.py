"""Models describing convexity certificates and stationary points."""

from __future__ import annotations

import math
from typing import Dict, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator


class ConvexityCertificate(BaseModel):
    """Constants (m, M, L_f) asserting strong convexity, gradient and Hessian smoothness."""

    model_config = ConfigDict(frozen=True)

    m: float = Field(ge=0.0)
    M: float = Field(gt=0.0)
    L_f: Optional[float] = Field(default=None, ge=0.0)

    @field_validator("m", "M", "L_f")
    @classmethod
    def _validate_finite(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not math.isfinite(value):
            raise ValueError("certificate constants must be finite")
        return value

    @property
    def condition_number(self) -> float:
        return math.inf if self.m == 0.0 else self.M / self.m


class StationaryPoint(BaseModel):
    """Approximate minimiser of a potential returned by gradient descent."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    theta_star: np.ndarray
    f_star: float
    grad_norm: float
    iterations: int = 0


class ViolationReport(BaseModel):
    """Outcome of probing a certificate on random pairs of points."""

    n_pairs: int
    n_violations: int = 0
    worst_margin: float = 0.0
    by_inequality: Dict[str, int] = Field(default_factory=dict)
    half_width: float

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        return self.n_violations == 0
