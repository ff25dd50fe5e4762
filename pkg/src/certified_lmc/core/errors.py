"""Custom exception hierarchy for domain-specific errors."""

from __future__ import annotations

from typing import Any, Mapping


class CertifiedLMCError(Exception):
    """Base exception for all custom errors raised by the sampler toolkit."""


class DomainError(CertifiedLMCError, ValueError):
    """Raised when an argument falls outside the region where a bound or rule is proven."""


class InfeasiblePlanError(DomainError):
    """Raised when a planner cannot produce parameters meeting its own preconditions."""


class EvaluationError(CertifiedLMCError):
    """Raised when a target model returns a non-finite value."""


class CapabilityError(CertifiedLMCError):
    """Raised when an operation needs a model capability that is not available."""


class NonConvergenceError(CertifiedLMCError):
    """Raised when an iterative solver exhausts its iteration budget."""

    def __init__(self, message: str, *, last_iterate: Any, iterations: int) -> None:
        super().__init__(message)
        self.last_iterate = last_iterate
        self.iterations = iterations


class MatrixDomainError(CertifiedLMCError):
    """Raised when a matrix is not symmetric positive definite where it must be."""


class SingularDesignError(MatrixDomainError):
    """Raised when a design Gram matrix is too close to singular to be inverted."""


class NumericalError(CertifiedLMCError):
    """Raised when floating point cancellation or overflow makes a result meaningless."""


class ChainDivergenceError(CertifiedLMCError):
    """Raised when a Markov chain leaves the finite floating point range."""

    def __init__(self, message: str, *, chain_index: int, step: int) -> None:
        super().__init__(message)
        self.chain_index = chain_index
        self.step = step


class EnsembleError(CertifiedLMCError):
    """Aggregates per-chain failures of an ensemble run."""

    def __init__(self, failures: Mapping[int, Exception]) -> None:
        self.failures = dict(sorted(failures.items()))
        indices = ", ".join(str(index) for index in self.failures)
        super().__init__(f"{len(self.failures)} chain(s) failed: {indices}")

    @property
    def first_chain(self) -> int:
        return next(iter(self.failures))


class ConfigError(CertifiedLMCError):
    """Raised when an experiment configuration cannot be validated."""
