"""Two-component Gaussian mixture ½N(a, I) + ½N(−a, I) with an exact sampler."""

from __future__ import annotations

import math
from typing import Callable, Tuple

import numpy as np
from scipy import optimize
from scipy.stats import norm

from certified_lmc.core.errors import DomainError
from certified_lmc.core.model import TargetModel
from certified_lmc.models.certificates import ConvexityCertificate


def _sigmoid_weight(s: np.ndarray | float) -> np.ndarray | float:
    """4·e^{s}(1 + e^{s})^{−2}, computed without overflow."""
    return 4.0 * np.exp(s - 2.0 * np.logaddexp(0.0, s))


def _householder_basis(u: np.ndarray) -> np.ndarray:
    """Orthogonal matrix whose first column is the unit vector u."""
    p = u.shape[0]
    e1 = np.zeros(p)
    e1[0] = 1.0
    w = e1 - u
    norm_w = np.linalg.norm(w)
    if norm_w < 1e-14:
        return np.eye(p)
    w /= norm_w
    return np.eye(p) - 2.0 * np.outer(w, w)


class GaussianMixtureTarget(TargetModel):
    """f(x) = ½‖x − a‖² − log(1 + e^{−2xᵀa}); strongly convex when ‖a‖ < 1.

    The Hessian is identity-plus-rank-one along a, so its eigenpairs are known
    in closed form and the direction basis never depends on x.
    """

    tag = "mixture"

    def __init__(self, a: np.ndarray) -> None:
        a = np.asarray(a, dtype=float)
        super().__init__(a.shape[0])
        self.a = a
        self.a_norm_sq = float(a @ a)
        self.a_norm = math.sqrt(self.a_norm_sq)
        self._basis = _householder_basis(a / self.a_norm) if self.a_norm > 0 else np.eye(self.dim)

    def potential(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        d = x - self.a
        return 0.5 * float(d @ d) - float(np.logaddexp(0.0, -2.0 * (x @ self.a)))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.gradient_rows(np.asarray(x, dtype=float)[None, :])[0]

    def gradient_rows(self, xs: np.ndarray) -> np.ndarray:
        s = 2.0 * (xs @ self.a)
        # 2(1 + e^{s})^{−1} = 2·expit(−s)
        coeff = 2.0 * np.exp(-np.logaddexp(0.0, s))
        return xs - self.a + coeff[:, None] * self.a

    @property
    def has_hessian(self) -> bool:
        return True

    def _top_eigenvalue(self, s: np.ndarray) -> np.ndarray:
        return 1.0 - self.a_norm_sq * _sigmoid_weight(s)

    def hessian(self, x: np.ndarray) -> np.ndarray:
        s = 2.0 * float(np.asarray(x, dtype=float) @ self.a)
        return np.eye(self.dim) - _sigmoid_weight(s) * np.outer(self.a, self.a)

    def hessian_rows(self, xs: np.ndarray) -> np.ndarray:
        weights = _sigmoid_weight(2.0 * (xs @ self.a))
        return np.eye(self.dim)[None, :, :] - weights[:, None, None] * np.outer(self.a, self.a)

    def structured_hessian(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        eigvals, eigvecs = self.structured_hessian_rows(np.asarray(x, dtype=float)[None, :])
        return eigvals[0], eigvecs[0]

    def structured_hessian_rows(self, xs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        n = xs.shape[0]
        eigvals = np.ones((n, self.dim))
        eigvals[:, 0] = self._top_eigenvalue(2.0 * (xs @ self.a))
        return eigvals, np.broadcast_to(self._basis, (n, self.dim, self.dim))

    def hvp_rows(self, xs: np.ndarray, vs: np.ndarray) -> np.ndarray:
        weights = _sigmoid_weight(2.0 * (xs @ self.a))
        return vs - (weights * (vs @ self.a))[:, None] * self.a


def mixture_vector(p: int, a_norm_sq: float = 0.5) -> np.ndarray:
    """a = √(a_norm_sq / p)·1_p, the direction used in the reference experiments."""
    if p < 1 or a_norm_sq < 0.0:
        raise DomainError("mixture vector needs p >= 1 and a nonnegative squared norm")
    return np.full(p, math.sqrt(a_norm_sq / p))


def mixture_certificate(a: np.ndarray) -> ConvexityCertificate:
    """m = 1 − ‖a‖², M = 1, L_f = ‖a‖³/2."""
    a_norm_sq = float(np.dot(a, a))
    if a_norm_sq >= 1.0:
        raise DomainError("mixture is strongly log-concave only for ‖a‖ < 1")
    return ConvexityCertificate(m=1.0 - a_norm_sq, M=1.0, L_f=0.5 * a_norm_sq**1.5)


def mixture_potential(a: np.ndarray, x: np.ndarray) -> float:
    return GaussianMixtureTarget(a).potential(x)


def mixture_gradient(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    return GaussianMixtureTarget(a).gradient(x)


def mixture_hessian(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    return GaussianMixtureTarget(a).hessian(x)


def mixture_direct_sample(a: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Exact draw: Y ~ Bernoulli(½), Z ~ N(0, I), X = Y(Z − a) + (1 − Y)(Z + a)."""
    a = np.asarray(a, dtype=float)
    y = rng.integers(0, 2)
    z = rng.standard_normal(a.shape[0])
    return y * (z - a) + (1 - y) * (z + a)


def mixture_cstar(a_norm_sq: float) -> float:
    """Root of c = 1 − 2(1 + e^{2c‖a‖²})^{−1} on [−1, 1]; the mode is c*·a."""

    if not (0.0 < a_norm_sq < 1.0):
        raise DomainError("mixture_cstar needs 0 < ‖a‖² < 1")

    def residual(c: float) -> float:
        return c - 1.0 + 2.0 * math.exp(-float(np.logaddexp(0.0, 2.0 * c * a_norm_sq)))

    return float(optimize.bisect(residual, -1.0, 1.0, xtol=1e-12, rtol=4 * np.finfo(float).eps))


def mixture_projection_cdf(a_norm: float) -> Callable[[np.ndarray], np.ndarray]:
    """CDF of vᵀX for v = a/‖a‖: ½Φ(t − ‖a‖) + ½Φ(t + ‖a‖)."""

    def cdf(t: np.ndarray) -> np.ndarray:
        return 0.5 * norm.cdf(t - a_norm) + 0.5 * norm.cdf(t + a_norm)

    return cdf


def mixture_projection_pdf(a_norm: float) -> Callable[[np.ndarray], np.ndarray]:
    """Density of vᵀX for v = a/‖a‖."""

    def pdf(t: np.ndarray) -> np.ndarray:
        return 0.5 * norm.pdf(t - a_norm) + 0.5 * norm.pdf(t + a_norm)

    return pdf
