"""Strong convexification and preconditioning of target models."""

from __future__ import annotations

from pathlib import Path
from typing import Callable, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from certified_lmc.core.errors import DomainError, MatrixDomainError, SingularDesignError
from certified_lmc.core.logging import get_logger
from certified_lmc.core.model import TargetModel
from certified_lmc.models.certificates import ConvexityCertificate
from certified_lmc.models.samples import SampleSet

logger = get_logger(__name__)

SYMMETRY_TOLERANCE = 1e-12
EIGENVALUE_FLOOR = 1e-10


class ConvexifySpec(BaseModel):
    """Ball B_R(x0) outside which a quadratic penalty of strength gamma is added."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    x0: np.ndarray
    R: float = Field(ge=0.0)
    gamma: float
    m_profile: Optional[Callable[[float], float]] = None
    mu_R: float = Field(default=0.0, ge=0.0)
    m_inf: float = Field(default=0.0, ge=0.0)

    @field_validator("x0", mode="before")
    @classmethod
    def _as_vector(cls, value: object) -> np.ndarray:
        return np.atleast_1d(np.asarray(value, dtype=float))


class ConvexifiedTarget(TargetModel):
    """f̄(x) = f(x) + (γ/2)(‖x − x0‖ − R)² outside B_R(x0), f inside.

    f̄ is C¹ but its Hessian jumps across the sphere, so Hessian-based
    updates are refused unless ``allow_lmco`` is set.
    """

    def __init__(self, base: TargetModel, spec: ConvexifySpec, allow_lmco: bool = False) -> None:
        super().__init__(base.dim)
        if not spec.gamma > 0.0:
            raise DomainError(f"penalty strength must be positive, got {spec.gamma}")
        if spec.x0.shape != (base.dim,):
            raise DomainError(f"center has shape {spec.x0.shape}, expected ({base.dim},)")
        self.base = base
        self.spec = spec
        self.allow_lmco = allow_lmco
        self.tag = f"{base.tag}+convexified"

    def _radial(self, xs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        diff = xs - self.spec.x0
        return diff, np.linalg.norm(diff, axis=-1)

    def potential(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        _, r = self._radial(x)
        excess = max(float(r) - self.spec.R, 0.0)
        return self.base.potential(x) + 0.5 * self.spec.gamma * excess**2

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.gradient_rows(np.asarray(x, dtype=float)[None, :])[0]

    def gradient_rows(self, xs: np.ndarray) -> np.ndarray:
        diff, r = self._radial(xs)
        outside = r > self.spec.R
        coeff = np.zeros_like(r)
        coeff[outside] = self.spec.gamma * (1.0 - self.spec.R / r[outside])
        return self.base.gradient_rows(xs) + coeff[:, None] * diff

    @property
    def has_hessian(self) -> bool:
        return self.base.has_hessian

    @property
    def supports_ozaki(self) -> bool:
        return self.allow_lmco and self.base.supports_ozaki

    def _penalty_hessian_rows(self, xs: np.ndarray) -> np.ndarray:
        diff, r = self._radial(xs)
        n = xs.shape[0]
        penalty = np.zeros((n, self.dim, self.dim))
        outside = r > self.spec.R
        if np.any(outside):
            ratio = self.spec.R / r[outside]
            u = diff[outside] / r[outside][:, None]
            penalty[outside] = self.spec.gamma * (
                (1.0 - ratio)[:, None, None] * np.eye(self.dim)
                + ratio[:, None, None] * np.einsum("ni,nj->nij", u, u)
            )
        return penalty

    def hessian(self, x: np.ndarray) -> np.ndarray:
        return self.hessian_rows(np.asarray(x, dtype=float)[None, :])[0]

    def hessian_rows(self, xs: np.ndarray) -> np.ndarray:
        return self.base.hessian_rows(xs) + self._penalty_hessian_rows(xs)

    def hvp_rows(self, xs: np.ndarray, vs: np.ndarray) -> np.ndarray:
        penalty = np.einsum("nij,nj->ni", self._penalty_hessian_rows(xs), vs)
        return self.base.hvp_rows(xs, vs) + penalty


def convexify(
    model: TargetModel,
    cert: ConvexityCertificate,
    spec: ConvexifySpec,
    allow_lmco: bool = False,
) -> Tuple[ConvexifiedTarget, ConvexityCertificate]:
    """Penalise the target outside B_R(x0); certificate (min(m_2R, m_∞ + γ/2), M + γ).

    Without an ``m_profile`` the global constant ``cert.m`` stands in for m_2R.
    """

    m_2R = spec.m_profile(2.0 * spec.R) if spec.m_profile is not None else cert.m
    barm = min(m_2R, spec.m_inf + 0.5 * spec.gamma)
    barM = cert.M + spec.gamma
    target = ConvexifiedTarget(model, spec, allow_lmco=allow_lmco)
    logger.debug(
        f"Convexified '{model.tag}' with R={spec.R:.4g}, γ={spec.gamma:.4g}: "
        f"m̄={barm:.4g}, M̄={barM:.4g}"
    )
    return target, ConvexityCertificate(m=barm, M=barM)


def convexified_tv_budget(gamma: float, p: int, mu_R: float) -> float:
    """TV distance between the target and its convexification, γ·p·μ_R/4."""
    if gamma < 0 or p < 0 or mu_R < 0:
        raise DomainError("penalty budget inputs must be nonnegative")
    return gamma * p * mu_R / 4.0


def inverse_sqrt(matrix: np.ndarray) -> np.ndarray:
    """Σ^{−1/2} by symmetric eigendecomposition, rejecting near-singular Σ."""

    matrix = np.asarray(matrix, dtype=float)
    eigvals, eigvecs = np.linalg.eigh(0.5 * (matrix + matrix.T))
    top = float(eigvals[-1]) if eigvals.size else 0.0
    if top <= 0.0 or eigvals[0] < EIGENVALUE_FLOOR * top:
        raise SingularDesignError(
            f"matrix is singular or nearly so (eigenvalues in [{eigvals[0]:.3e}, {top:.3e}])"
        )
    return (eigvecs / np.sqrt(eigvals)) @ eigvecs.T


def condition_number_gain(sigma: np.ndarray) -> float:
    """ν_max/ν_min of a Gram matrix: the factor preconditioning by Σ^{−1/2} removes."""
    eigvals = np.linalg.eigvalsh(np.asarray(sigma, dtype=float))
    if eigvals[0] <= 0.0:
        raise SingularDesignError("Gram matrix has a non-positive eigenvalue")
    return float(eigvals[-1] / eigvals[0])


class Preconditioner(BaseModel):
    """Symmetric positive-definite matrix A used as y ↦ Ay."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    A: np.ndarray

    @field_validator("A", mode="before")
    @classmethod
    def _validate_matrix(cls, value: object) -> np.ndarray:
        A = np.atleast_2d(np.asarray(value, dtype=float))
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise MatrixDomainError(f"preconditioner must be square, got shape {A.shape}")
        scale = max(1.0, float(np.max(np.abs(A))))
        if float(np.max(np.abs(A - A.T))) > SYMMETRY_TOLERANCE * scale:
            raise MatrixDomainError("preconditioner must be symmetric")
        if float(np.linalg.eigvalsh(A)[0]) <= 0.0:
            raise MatrixDomainError("preconditioner must be positive definite")
        return A

    @property
    def dim(self) -> int:
        return int(self.A.shape[0])

    @classmethod
    def identity(cls, dim: int) -> "Preconditioner":
        return cls(A=np.eye(dim))

    @classmethod
    def from_gram(cls, sigma: np.ndarray) -> "Preconditioner":
        """A = Σ^{−1/2}."""
        return cls(A=inverse_sqrt(sigma))

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "Preconditioner":
        from certified_lmc.adapters.csv import read_matrix_csv

        return cls(A=read_matrix_csv(path))

    def to_csv(self, path: Union[str, Path]) -> Path:
        from certified_lmc.adapters.csv import write_matrix_csv

        return write_matrix_csv(self.A, path)


class PreconditionedTarget(TargetModel):
    """g(y) = f(Ay) with ∇g = A∇f(Ay) and ∇²g = A∇²f(Ay)A."""

    def __init__(self, base: TargetModel, preconditioner: Preconditioner) -> None:
        if preconditioner.dim != base.dim:
            raise DomainError(
                f"preconditioner has dimension {preconditioner.dim}, target has {base.dim}"
            )
        super().__init__(base.dim)
        self.base = base
        self.preconditioner = preconditioner
        self.A = preconditioner.A
        self.tag = f"{base.tag}+preconditioned"

    def potential(self, y: np.ndarray) -> float:
        return self.base.potential(self.A @ np.asarray(y, dtype=float))

    def gradient(self, y: np.ndarray) -> np.ndarray:
        return self.A @ self.base.gradient(self.A @ np.asarray(y, dtype=float))

    def gradient_rows(self, ys: np.ndarray) -> np.ndarray:
        return self.base.gradient_rows(ys @ self.A) @ self.A

    @property
    def has_hessian(self) -> bool:
        return self.base.has_hessian

    @property
    def supports_ozaki(self) -> bool:
        return self.base.supports_ozaki

    def hessian(self, y: np.ndarray) -> np.ndarray:
        return self.A @ self.base.hessian(self.A @ np.asarray(y, dtype=float)) @ self.A

    def hessian_rows(self, ys: np.ndarray) -> np.ndarray:
        return np.einsum("ij,njk,kl->nil", self.A, self.base.hessian_rows(ys @ self.A), self.A)

    def hvp_rows(self, ys: np.ndarray, vs: np.ndarray) -> np.ndarray:
        return self.base.hvp_rows(ys @ self.A, vs @ self.A) @ self.A


def precondition(
    model: TargetModel, cert: ConvexityCertificate, A: Preconditioner
) -> Tuple[PreconditionedTarget, ConvexityCertificate]:
    """Wrap ``model`` as g(y) = f(Ay); ``cert`` must already describe g."""
    return PreconditionedTarget(model, A), cert


def map_back(samples: SampleSet, A: Preconditioner) -> SampleSet:
    """Replace every draw η by Aη."""
    if samples.dim != A.dim:
        raise DomainError(f"samples have dimension {samples.dim}, preconditioner has {A.dim}")
    meta = samples.meta.model_copy(update={"transforms": [*samples.meta.transforms, "map_back"]})
    trajectories = None if samples.trajectories is None else samples.trajectories @ A.A
    return SampleSet(data=samples.data @ A.A, meta=meta, trajectories=trajectories)
