"""Bayesian logistic regression posterior with a Σ_X-Gaussian prior.

The potential is

    f(θ) = YᵀXθ + Σᵢ log(1 + e^{−θᵀXᵢ}) + (λ/2)·θᵀΣ_Xθ,     Σ_X = XᵀX/n,

and sampling happens on g(y) = f(Ay) with A = Σ_X^{−1/2}, for which
λ·I ≤ ∇²g ≤ (λ + n/4)·I holds globally.
"""

from __future__ import annotations

import math
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy import optimize
from scipy.special import expit, gammaln

from certified_lmc.core.errors import DomainError, NumericalError
from certified_lmc.core.logging import get_logger
from certified_lmc.core.model import TargetModel
from certified_lmc.core.transforms import PreconditionedTarget, Preconditioner, inverse_sqrt
from certified_lmc.models.certificates import ConvexityCertificate
from certified_lmc.targets.special import log_tail_fourth_moment

logger = get_logger(__name__)

# sup_t |d³/dt³ log(1 + e^{−t})| ≈ 0.0962
THIRD_DERIVATIVE_BOUND = 0.1
R_SEARCH_GRID = 64
R_SEARCH_TOLERANCE = 1e-3


class LogisticGenConfig(BaseModel):
    """Synthetic design: Rademacher rows scaled to unit norm, labels from θ_true."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    p: int = Field(ge=1)
    n: int = Field(ge=1)
    theta_true: Optional[np.ndarray] = None
    seed: int = 0

    @field_validator("theta_true", mode="before")
    @classmethod
    def _as_vector(cls, value: object) -> Optional[np.ndarray]:
        if value is None:
            return None
        return np.atleast_1d(np.asarray(value, dtype=float))

    def resolved_theta(self) -> np.ndarray:
        return np.ones(self.p) if self.theta_true is None else self.theta_true


def logistic_generate(config: LogisticGenConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Draw (X, Y) with Yᵢ | Xᵢ ~ Bernoulli(e^{θᵀXᵢ}/(1 + e^{θᵀXᵢ}))."""

    theta = config.resolved_theta()
    if theta.shape != (config.p,):
        raise DomainError(f"theta_true has shape {theta.shape}, expected ({config.p},)")
    if config.n < config.p:
        logger.warning(
            f"Generating n={config.n} < p={config.p} rows; the Gram matrix will be singular"
        )
    rng = np.random.default_rng(config.seed)
    X = rng.choice(np.array([-1.0, 1.0]), size=(config.n, config.p)) / math.sqrt(config.p)
    Y = (rng.random(config.n) < expit(X @ theta)).astype(float)
    return X, Y


def logistic_default_lambda(p: int) -> float:
    """Prior strength λ = 3p/π²."""
    return 3.0 * p / math.pi**2


class LogisticTarget(TargetModel):
    """Posterior potential f(θ) on the original parameter scale."""

    tag = "logistic"

    def __init__(self, X: np.ndarray, Y: np.ndarray, lam: float) -> None:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.asarray(Y, dtype=float).ravel()
        super().__init__(X.shape[1])
        if Y.shape[0] != X.shape[0]:
            raise DomainError(f"X has {X.shape[0]} rows but Y has {Y.shape[0]} labels")
        if not np.all((Y == 0.0) | (Y == 1.0)):
            raise DomainError("labels must be 0 or 1")
        if lam <= 0:
            raise DomainError(f"prior strength must be positive, got {lam}")
        self.X = X
        self.Y = Y
        self.lam = float(lam)
        self.n = int(X.shape[0])
        self.sigma_x = X.T @ X / self.n
        self.A = inverse_sqrt(self.sigma_x)
        self._linear = X.T @ Y

    def potential(self, theta: np.ndarray) -> float:
        theta = np.asarray(theta, dtype=float)
        t = self.X @ theta
        return float(
            self._linear @ theta
            + np.sum(np.logaddexp(0.0, -t))
            + 0.5 * self.lam * theta @ self.sigma_x @ theta
        )

    def gradient(self, theta: np.ndarray) -> np.ndarray:
        return self.gradient_rows(np.asarray(theta, dtype=float)[None, :])[0]

    def gradient_rows(self, thetas: np.ndarray) -> np.ndarray:
        t = thetas @ self.X.T
        # Xᵢ/(1 + e^{tᵢ}) summed over i
        return self._linear - expit(-t) @ self.X + self.lam * thetas @ self.sigma_x

    @property
    def has_hessian(self) -> bool:
        return True

    def _weights(self, thetas: np.ndarray) -> np.ndarray:
        s = expit(thetas @ self.X.T)
        return s * (1.0 - s)

    def hessian(self, theta: np.ndarray) -> np.ndarray:
        return self.hessian_rows(np.asarray(theta, dtype=float)[None, :])[0]

    def hessian_rows(self, thetas: np.ndarray) -> np.ndarray:
        weights = self._weights(thetas)
        return np.einsum("nk,ki,kj->nij", weights, self.X, self.X) + self.lam * self.sigma_x

    def hvp_rows(self, thetas: np.ndarray, vs: np.ndarray) -> np.ndarray:
        weights = self._weights(thetas)
        projected = weights * (vs @ self.X.T)
        return projected @ self.X + self.lam * vs @ self.sigma_x

    @property
    def preconditioned_rows(self) -> np.ndarray:
        """Rows AXᵢ of the design on the preconditioned scale."""
        return self.X @ self.A


class LipschitzBounds(BaseModel):
    """Hessian Lipschitz constants of g: the spectral bound and its coarse relaxation."""

    model_config = ConfigDict(frozen=True)

    tight: float
    coarse: float


def logistic_lipschitz_hessian(target: LogisticTarget) -> LipschitzBounds:
    """0.1·‖Σ‖AXᵢ‖·AXᵢXᵢᵀA‖ and the bound 0.1·n·maxᵢ‖AXᵢ‖ it never exceeds."""
    rows = target.preconditioned_rows
    norms = np.linalg.norm(rows, axis=1)
    weighted = (rows * norms[:, None]).T @ rows
    tight = THIRD_DERIVATIVE_BOUND * float(np.linalg.eigvalsh(weighted)[-1])
    coarse = THIRD_DERIVATIVE_BOUND * target.n * float(np.max(norms))
    return LipschitzBounds(tight=tight, coarse=coarse)


def logistic_certificate(target: LogisticTarget) -> ConvexityCertificate:
    return ConvexityCertificate(
        m=target.lam,
        M=target.lam + 0.25 * target.n,
        L_f=logistic_lipschitz_hessian(target).tight,
    )


def logistic_model(
    X: np.ndarray, Y: np.ndarray, lam: Optional[float] = None
) -> Tuple[PreconditionedTarget, ConvexityCertificate, Preconditioner]:
    """Preconditioned posterior g(y) = f(Σ_X^{−1/2}y) with its certificate (λ, λ + n/4, L_g)."""

    X = np.atleast_2d(np.asarray(X, dtype=float))
    lam = logistic_default_lambda(X.shape[1]) if lam is None else lam
    target = LogisticTarget(X, Y, lam)
    preconditioner = Preconditioner(A=target.A)
    model = PreconditionedTarget(target, preconditioner)
    model.tag = "logistic"
    cert = logistic_certificate(target)
    logger.debug(
        f"Logistic model p={target.dim}, n={target.n}, λ={lam:.4g}: "
        f"m={cert.m:.4g}, M={cert.M:.4g}, L_g={cert.L_f:.4g}"
    )
    return model, cert, preconditioner


def _unwrap(target: TargetModel) -> LogisticTarget:
    base = target.base if isinstance(target, PreconditionedTarget) else target
    if not isinstance(base, LogisticTarget):
        raise DomainError(f"expected a logistic target, got '{target.tag}'")
    return base


def logistic_m_R(target: TargetModel, theta_star: np.ndarray, R: float) -> float:
    """λ plus the smallest eigenvalue of B_R, a lower bound on ∇²g over B_R(θ*).

    ``theta_star`` is the mode of g, on the preconditioned scale.
    """

    if R < 0:
        raise DomainError(f"radius must be nonnegative, got {R}")
    base = _unwrap(target)
    rows = base.preconditioned_rows
    t = np.abs(rows @ np.asarray(theta_star, dtype=float)) + R * np.linalg.norm(rows, axis=1)
    # e^{t}/(1 + e^{2t})², in log-space
    weights = np.exp(t - 2.0 * np.logaddexp(0.0, 2.0 * t))
    B_R = (rows * weights[:, None]).T @ rows
    return base.lam + max(float(np.linalg.eigvalsh(B_R)[0]), 0.0)


def log_p_mu_R_squared(p: int, m_R: float, M: float, R: float) -> float:
    """log (pμ_R)² = log[2(M/2)^{p/2} S(m_R R²) / ((m_R R²)^{p+4} Γ(p/2))]."""

    if m_R <= 0 or R <= 0:
        raise DomainError("μ_R needs m_R > 0 and R > 0")
    if M <= 0 or p < 1:
        raise DomainError("μ_R needs M > 0 and p >= 1")
    x = m_R * R * R
    return (
        math.log(2.0)
        + 0.5 * p * math.log(0.5 * M)
        - (p + 4) * math.log(x)
        - float(gammaln(0.5 * p))
        + log_tail_fourth_moment(p, x)
    )


def logistic_mu_R(p: int, m_R: float, M: float, R: float) -> float:
    """Fourth-moment scale μ_R bounding ∫(‖x − θ*‖ − R)⁴₊ π by p²μ_R²."""
    log_value = log_p_mu_R_squared(p, m_R, M, R)
    value = math.exp(0.5 * log_value) / p
    if not math.isfinite(value):
        raise NumericalError(f"μ_R overflowed at p={p}, m_R={m_R}, R={R}")
    return value


class OptimalRadius(BaseModel):
    """Ball radius maximising the convexified strong-convexity constant."""

    model_config = ConfigDict(frozen=True)

    R: float
    barm: float
    gamma: float
    mu_R: float
    m_2R: float


def _evaluate_radius(
    target: TargetModel, theta_star: np.ndarray, eps: float, M: float, R: float
) -> OptimalRadius:
    base = _unwrap(target)
    p = base.dim
    m_R = logistic_m_R(target, theta_star, R)
    m_2R = logistic_m_R(target, theta_star, 2.0 * R)
    p_mu = math.exp(0.5 * log_p_mu_R_squared(p, m_R, M, R))
    gamma = 2.0 * eps / p_mu
    barm = min(m_2R, base.lam + 0.5 * gamma)
    return OptimalRadius(R=R, barm=barm, gamma=gamma, mu_R=p_mu / p, m_2R=m_2R)


def logistic_optimal_R(
    target: TargetModel, theta_star: np.ndarray, eps: float
) -> OptimalRadius:
    """Maximise R ↦ min(m_2R, λ + ε/(pμ_R)) over R ∈ [R_max/200, R_max], R_max = 10/√λ.

    A geometric grid locates the best cell; golden-section search then refines
    it to a relative tolerance of 1e-3. When the best grid point sits on the
    boundary no bracket exists and the grid point is returned.
    """

    if not 0.0 < eps <= 0.5:
        raise DomainError(f"eps must lie in (0, 1/2], got {eps}")
    base = _unwrap(target)
    M = base.lam + 0.25 * base.n
    R_max = 10.0 / math.sqrt(base.lam)
    grid = np.geomspace(R_max / 200.0, R_max, R_SEARCH_GRID)

    def objective(R: float) -> float:
        return -_evaluate_radius(target, theta_star, eps, M, float(R)).barm

    values = np.array([objective(R) for R in grid])
    best = int(np.argmin(values))
    if 0 < best < len(grid) - 1:
        try:
            result = optimize.minimize_scalar(
                objective,
                bracket=(grid[best - 1], grid[best], grid[best + 1]),
                method="golden",
                options={"xtol": R_SEARCH_TOLERANCE},
            )
            if result.fun <= values[best] and grid[0] <= result.x <= grid[-1]:
                radius = _evaluate_radius(target, theta_star, eps, M, float(result.x))
                logger.debug(f"Optimal radius R={radius.R:.4g} with m̄={radius.barm:.4g}")
                return radius
        except ValueError as exc:
            logger.warning(f"Golden-section bracket failed ({exc}); keeping the grid optimum")
    else:
        logger.warning(
            f"Best radius {grid[best]:.4g} lies on the search boundary; keeping the grid optimum"
        )
    return _evaluate_radius(target, theta_star, eps, M, float(grid[best]))
