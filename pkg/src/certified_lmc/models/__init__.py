"""Data models describing shared contracts between the numerical core and the CLI."""

from .certificates import ConvexityCertificate, StationaryPoint, ViolationReport
from .experiments import (
    ComparisonReport,
    ConvexifyBlock,
    ExperimentConfig,
    LogisticDataSpec,
    LogisticKKReport,
    LogisticTrial,
    SamplerKind,
    Table1Row,
    TargetKind,
)
from .plans import AlgorithmTag, SamplerPlan, WarmStartSpec
from .reports import (
    DiagnosticReport,
    EnergyBoundReport,
    KSReport,
    MarginalSummaryDistances,
    MomentReport,
)
from .samples import RunConfig, SampleMeta, SampleSet, UpdateRule

__all__ = [
    "AlgorithmTag",
    "ComparisonReport",
    "ConvexifyBlock",
    "ConvexityCertificate",
    "DiagnosticReport",
    "EnergyBoundReport",
    "ExperimentConfig",
    "KSReport",
    "LogisticDataSpec",
    "LogisticKKReport",
    "LogisticTrial",
    "MarginalSummaryDistances",
    "MomentReport",
    "RunConfig",
    "SampleMeta",
    "SampleSet",
    "SamplerKind",
    "SamplerPlan",
    "StationaryPoint",
    "Table1Row",
    "TargetKind",
    "UpdateRule",
    "ViolationReport",
    "WarmStartSpec",
]
