"""Experiment documents accepted by the CLI and the summaries it produces."""

from __future__ import annotations

from enum import Enum
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class TargetKind(str, Enum):
    MIXTURE = "mixture"
    LOGISTIC = "logistic"
    DIRECT_MIXTURE = "direct-mixture"


class SamplerKind(str, Enum):
    LMC = "lmc"
    LMCO = "lmco"
    LMCO2 = "lmco2"


class LogisticDataSpec(BaseModel):
    """Where the logistic design comes from: a dataset directory or the generator."""

    model_config = ConfigDict(extra="forbid")

    n: int = Field(default=200, ge=1)
    data_dir: Optional[Path] = None
    data_seed: int = 0
    lam: Optional[float] = Field(default=None, gt=0.0)


class ConvexifyBlock(BaseModel):
    """Penalty outside a ball around the mode; R and γ default to the optimised radius."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["convexify"] = "convexify"
    R: Optional[float] = Field(default=None, ge=0.0)
    gamma: Optional[float] = Field(default=None, gt=0.0)


class ExperimentConfig(BaseModel):
    """Document driving the ``sample`` command."""

    model_config = ConfigDict(extra="forbid")

    target: TargetKind
    p: int = Field(default=2, ge=1)
    a_norm_sq: float = Field(default=0.5, ge=0.0, lt=1.0)
    logistic: Optional[LogisticDataSpec] = None
    eps: float = Field(default=0.1, gt=0.0, le=0.5)
    seed: int = 0
    n_chains: int = Field(default=1000, ge=1)
    algo: SamplerKind = SamplerKind.LMC
    output: Path = Path("samples.csv")
    record_trajectory: bool = False
    transform: Optional[ConvexifyBlock] = None

    @model_validator(mode="after")
    def _validate_combination(self) -> "ExperimentConfig":
        if self.target is TargetKind.LOGISTIC and self.logistic is None:
            self.logistic = LogisticDataSpec()
        if self.transform is not None and self.algo is not SamplerKind.LMC:
            raise ValueError("convexified targets are sampled with LMC only")
        if self.transform is not None and self.target is TargetKind.DIRECT_MIXTURE:
            raise ValueError("the direct sampler takes no transform")
        return self


class Table1Row(BaseModel):
    p: int
    algo: str
    K: int
    T: float
    h: float
    predicted_tv: float
    reported_K: Optional[int] = None


class LogisticTrial(BaseModel):
    """Iteration counts of plain and convexified LMC on one generated dataset."""

    trial: int
    seed: int
    K: int
    K_prime: int
    R: float
    barm: float
    gamma: float


class LogisticKKReport(BaseModel):
    p: int
    n: int
    eps: float
    trials: List[LogisticTrial]
    mean_K: float
    mean_K_prime: float


class ComparisonReport(BaseModel):
    """Marginal summary distances between LMC and LMCO′ sample sets on logistic regression."""

    p: int
    n: int
    eps: float
    n_chains: int
    lmc_plan: str
    K_lmc: int
    K_lmco2: int
    d_mean: float
    d_median: float
    d_Q1: float
    d_Q3: float
