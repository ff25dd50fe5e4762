"""Evaluatable target densities, finite-difference validators and certificate probes."""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Callable, Optional, Tuple

import numpy as np

from certified_lmc.core.errors import CapabilityError, DomainError, EvaluationError
from certified_lmc.core.logging import get_logger
from certified_lmc.models.certificates import ConvexityCertificate, ViolationReport

logger = get_logger(__name__)

Spectrum = Tuple[np.ndarray, np.ndarray]

PROBE_SLACK = 1e-9


class TargetModel(ABC):
    """Potential f of a density proportional to exp(-f) on R^p.

    Implementations must be pure: every evaluator may be called from several
    threads at once. The ``*_rows`` evaluators take an ``(n, p)`` array of
    points and return row-stacked results; the defaults loop over rows and
    concrete targets vectorise them.
    """

    tag: str = "target"

    def __init__(self, dim: int) -> None:
        if dim < 1:
            raise DomainError(f"dimension must be positive, got {dim}")
        self.dim = int(dim)

    @abstractmethod
    def potential(self, x: np.ndarray) -> float:
        """Evaluate f(x)."""

    @abstractmethod
    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Evaluate the gradient of f at x."""

    @property
    def has_hessian(self) -> bool:
        return False

    @property
    def supports_ozaki(self) -> bool:
        """Whether Hessian-based updates may be run on this model."""
        return self.has_hessian

    def hessian(self, x: np.ndarray) -> np.ndarray:
        raise CapabilityError(f"target '{self.tag}' does not provide a Hessian")

    def structured_hessian(self, x: np.ndarray) -> Optional[Spectrum]:
        """Analytic eigenpairs ``(eigvals, eigvecs)`` of the Hessian, if known."""
        return None

    def gradient_rows(self, xs: np.ndarray) -> np.ndarray:
        return np.vstack([self.gradient(x) for x in xs])

    def hessian_rows(self, xs: np.ndarray) -> np.ndarray:
        return np.stack([self.hessian(x) for x in xs])

    def structured_hessian_rows(self, xs: np.ndarray) -> Optional[Spectrum]:
        spectra = [self.structured_hessian(x) for x in xs]
        if not spectra or any(spectrum is None for spectrum in spectra):
            return None
        eigvals = np.stack([spectrum[0] for spectrum in spectra])  # type: ignore[index]
        eigvecs = np.stack([spectrum[1] for spectrum in spectra])  # type: ignore[index]
        return eigvals, eigvecs

    def hvp_rows(self, xs: np.ndarray, vs: np.ndarray) -> np.ndarray:
        """Hessian-vector products, row by row."""
        return np.einsum("nij,nj->ni", self.hessian_rows(xs), vs)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(tag={self.tag!r}, dim={self.dim})"


class CallableTarget(TargetModel):
    """Target assembled from user-supplied evaluation functions."""

    def __init__(
        self,
        dim: int,
        potential: Callable[[np.ndarray], float],
        gradient: Callable[[np.ndarray], np.ndarray],
        hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        structured_hessian: Optional[Callable[[np.ndarray], Spectrum]] = None,
        *,
        tag: str = "callable",
    ) -> None:
        super().__init__(dim)
        self._potential = potential
        self._gradient = gradient
        self._hessian = hessian
        self._structured = structured_hessian
        self.tag = tag

    def potential(self, x: np.ndarray) -> float:
        return float(self._potential(np.asarray(x, dtype=float)))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self._gradient(np.asarray(x, dtype=float)), dtype=float)

    @property
    def has_hessian(self) -> bool:
        return self._hessian is not None or self._structured is not None

    def hessian(self, x: np.ndarray) -> np.ndarray:
        if self._hessian is not None:
            return np.asarray(self._hessian(np.asarray(x, dtype=float)), dtype=float)
        if self._structured is not None:
            eigvals, eigvecs = self._structured(np.asarray(x, dtype=float))
            return (eigvecs * eigvals) @ eigvecs.T
        return super().hessian(x)

    def structured_hessian(self, x: np.ndarray) -> Optional[Spectrum]:
        if self._structured is None:
            return None
        return self._structured(np.asarray(x, dtype=float))


class QuadraticTarget(TargetModel):
    """Gaussian target f(x) = ½ (x - c)ᵀ H (x - c), i.e. N(c, H⁻¹)."""

    tag = "quadratic"

    def __init__(self, H: np.ndarray, center: Optional[np.ndarray] = None) -> None:
        H = np.atleast_2d(np.asarray(H, dtype=float))
        super().__init__(H.shape[0])
        if H.shape != (self.dim, self.dim) or not np.allclose(H, H.T, rtol=1e-12, atol=0.0):
            raise DomainError("quadratic target needs a symmetric square matrix")
        self.H = H
        self.center = np.zeros(self.dim) if center is None else np.asarray(center, dtype=float)
        self._eigvals, self._eigvecs = np.linalg.eigh(H)

    @classmethod
    def isotropic(cls, dim: int, scale: float = 1.0) -> "QuadraticTarget":
        return cls(scale * np.eye(dim))

    @property
    def covariance(self) -> np.ndarray:
        return np.linalg.inv(self.H)

    def potential(self, x: np.ndarray) -> float:
        d = np.asarray(x, dtype=float) - self.center
        return 0.5 * float(d @ self.H @ d)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.H @ (np.asarray(x, dtype=float) - self.center)

    @property
    def has_hessian(self) -> bool:
        return True

    def hessian(self, x: np.ndarray) -> np.ndarray:
        return self.H.copy()

    def structured_hessian(self, x: np.ndarray) -> Spectrum:
        return self._eigvals, self._eigvecs

    def gradient_rows(self, xs: np.ndarray) -> np.ndarray:
        return (xs - self.center) @ self.H

    def hessian_rows(self, xs: np.ndarray) -> np.ndarray:
        return np.broadcast_to(self.H, (xs.shape[0], self.dim, self.dim))

    def structured_hessian_rows(self, xs: np.ndarray) -> Spectrum:
        n = xs.shape[0]
        return (
            np.broadcast_to(self._eigvals, (n, self.dim)),
            np.broadcast_to(self._eigvecs, (n, self.dim, self.dim)),
        )

    def hvp_rows(self, xs: np.ndarray, vs: np.ndarray) -> np.ndarray:
        return vs @ self.H


def default_fd_step(x: np.ndarray, scale: float = 1e-5) -> float:
    """Centered-difference step ``scale * (1 + ‖x‖∞)``."""
    return scale * (1.0 + float(np.max(np.abs(x)))) if np.size(x) else scale


def _checked_potential(model: TargetModel, point: np.ndarray, coordinate: int) -> float:
    value = model.potential(point)
    if not np.isfinite(value):
        raise EvaluationError(
            f"potential of '{model.tag}' is not finite when probing coordinate {coordinate}"
        )
    return value


def fd_gradient_check(
    model: TargetModel, x: np.ndarray, step: Optional[float] = None
) -> float:
    """Max absolute deviation between the gradient and centered differences of f."""

    x = np.asarray(x, dtype=float)
    step = default_fd_step(x) if step is None else step
    if step <= 0:
        raise DomainError("finite-difference step must be positive")

    gradient = model.gradient(x)
    error = 0.0
    for i in range(model.dim):
        shift = np.zeros_like(x)
        shift[i] = step
        forward = _checked_potential(model, x + shift, i)
        backward = _checked_potential(model, x - shift, i)
        estimate = (forward - backward) / (2.0 * step)
        error = max(error, abs(estimate - gradient[i]))
    return error


def fd_hessian_check(
    model: TargetModel, x: np.ndarray, step: Optional[float] = None
) -> float:
    """Max entrywise deviation between the Hessian and the symmetrised FD Jacobian of ∇f."""

    if not model.has_hessian:
        raise CapabilityError(f"target '{model.tag}' does not provide a Hessian")
    x = np.asarray(x, dtype=float)
    step = default_fd_step(x) if step is None else step
    if step <= 0:
        raise DomainError("finite-difference step must be positive")

    jacobian = np.empty((model.dim, model.dim))
    for j in range(model.dim):
        shift = np.zeros_like(x)
        shift[j] = step
        jacobian[:, j] = (model.gradient(x + shift) - model.gradient(x - shift)) / (2.0 * step)
    symmetric = 0.5 * (jacobian + jacobian.T)
    return float(np.max(np.abs(symmetric - model.hessian(x))))


def hessian_symmetry_error(model: TargetModel, x: np.ndarray) -> float:
    """Relative asymmetry ‖H − Hᵀ‖max / max(1, ‖H‖max) of the supplied Hessian."""
    H = model.hessian(np.asarray(x, dtype=float))
    return float(np.max(np.abs(H - H.T)) / max(1.0, float(np.max(np.abs(H)))))


def certificate_probe(
    model: TargetModel,
    cert: ConvexityCertificate,
    n_pairs: int,
    seed: int,
    center: Optional[np.ndarray] = None,
) -> ViolationReport:
    """Check the certificate inequalities on random pairs drawn from a cube.

    The cube has half-width 3/√m (3/√M when m = 0) around ``center``, or
    around the origin when no mode is known. Margins are reported as the
    amount by which an inequality fails, so a passing report has
    ``worst_margin <= 0``.
    """

    if n_pairs < 1:
        raise DomainError("n_pairs must be at least 1")
    base = np.zeros(model.dim) if center is None else np.asarray(center, dtype=float)
    half_width = 3.0 / np.sqrt(cert.m if cert.m > 0 else cert.M)
    rng = np.random.default_rng(seed)
    check_hessian = cert.L_f is not None and model.has_hessian

    counts = {"strong_convexity": 0, "gradient_lipschitz": 0}
    if check_hessian:
        counts["hessian_lipschitz"] = 0
    worst = -np.inf

    for _ in range(n_pairs):
        theta = base + rng.uniform(-half_width, half_width, size=model.dim)
        theta_bar = base + rng.uniform(-half_width, half_width, size=model.dim)
        diff = theta - theta_bar
        dist = float(np.linalg.norm(diff))
        f_theta = model.potential(theta)
        f_bar = model.potential(theta_bar)
        grad_bar = model.gradient(theta_bar)
        grad_theta = model.gradient(theta)
        slacks = {
            "strong_convexity": PROBE_SLACK * max(1.0, abs(f_theta) + abs(f_bar)),
            "gradient_lipschitz": PROBE_SLACK * max(1.0, cert.M * dist),
            "hessian_lipschitz": PROBE_SLACK * max(1.0, (cert.L_f or 0.0) * dist),
        }

        margins = {
            "strong_convexity": 0.5 * cert.m * dist**2 - (f_theta - f_bar - grad_bar @ diff),
            "gradient_lipschitz": float(np.linalg.norm(grad_theta - grad_bar)) - cert.M * dist,
        }
        if check_hessian:
            spread = np.linalg.norm(model.hessian(theta) - model.hessian(theta_bar), ord=2)
            margins["hessian_lipschitz"] = float(spread) - cert.L_f * dist  # type: ignore[operator]

        for kind, margin in margins.items():
            worst = max(worst, margin)
            if margin > slacks[kind]:
                counts[kind] += 1

    report = ViolationReport(
        n_pairs=n_pairs,
        n_violations=sum(counts.values()),
        worst_margin=float(worst),
        by_inequality=counts,
        half_width=float(half_width),
    )
    if report.n_violations:
        logger.warning(f"Certificate probe on '{model.tag}' found violations: {counts}")
    return report
