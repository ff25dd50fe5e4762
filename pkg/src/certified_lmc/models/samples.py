"""Models for ensemble configuration and the sample sets they produce."""

from __future__ import annotations

from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from certified_lmc.models.plans import SamplerPlan


class UpdateRule(str, Enum):
    """Markov kernel applied at every step of a chain."""

    LMC = "LMC"
    LMCO = "LMCO"
    LMCO2 = "LMCO2"


class RunConfig(BaseModel):
    """Ensemble layout: chain count, seed and recording options."""

    model_config = ConfigDict(frozen=True)

    n_chains: int = Field(default=1, ge=1)
    seed: int = 0
    record_trajectory: bool = False
    algo: Optional[UpdateRule] = None

    @field_validator("seed")
    @classmethod
    def _validate_seed(cls, value: int) -> int:
        if not (-(2**63) <= value < 2**64):
            raise ValueError("seed must fit in 64 bits")
        return value


class SampleMeta(BaseModel):
    """Provenance needed to regenerate a sample set."""

    seed: int
    target: str
    n_chains: int
    algo: str
    plan: Optional[SamplerPlan] = None
    wall_time_s: float = 0.0
    empirical_only: bool = False
    transforms: List[str] = Field(default_factory=list)
    config: Dict[str, Any] = Field(default_factory=dict)


class SampleSet(BaseModel):
    """N drawn p-vectors with provenance."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    data: np.ndarray
    meta: SampleMeta
    trajectories: Optional[np.ndarray] = None

    @field_validator("data")
    @classmethod
    def _validate_data(cls, value: np.ndarray) -> np.ndarray:
        value = np.asarray(value, dtype=float)
        if value.ndim != 2:
            raise ValueError("sample data must be an N x p matrix")
        if not np.all(np.isfinite(value)):
            raise ValueError("sample data must be finite")
        return value

    @property
    def n(self) -> int:
        return int(self.data.shape[0])

    @property
    def dim(self) -> int:
        return int(self.data.shape[1])
