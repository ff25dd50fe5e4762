"""Gradient descent mode-finder with a certified stopping rule."""

from __future__ import annotations

import math

import numpy as np

from certified_lmc.core.errors import DomainError, EvaluationError, NonConvergenceError
from certified_lmc.core.logging import get_logger
from certified_lmc.core.model import TargetModel
from certified_lmc.models.certificates import ConvexityCertificate, StationaryPoint

logger = get_logger(__name__)


def gd_iteration_cap(m: float, M: float, f_gap: float, target_sq_dist: float) -> int:
    """Iterations after which ‖θ_k − θ*‖² ≤ ``target_sq_dist`` is guaranteed.

    Solves (2/m)·f_gap·(1 − m/(2M))^k ≤ target_sq_dist for k, the budget of
    gradient descent with step 1/(2M) on an (m, M)-convex function.
    """

    if m <= 0 or M <= 0 or target_sq_dist <= 0:
        raise DomainError("iteration cap needs m > 0, M > 0 and a positive target")
    if f_gap <= 0:
        return 1
    numerator = math.log(2.0 * f_gap / m) - math.log(target_sq_dist)
    rate = math.log(2.0 * M / (2.0 * M - m))
    return max(1, math.ceil(numerator / rate)) + 1


def minimize_gd(
    model: TargetModel,
    cert: ConvexityCertificate,
    x0: np.ndarray,
    tol: float,
) -> StationaryPoint:
    """Run θ ← θ − ∇f(θ)/(2M) until ‖∇f(θ)‖ ≤ min(tol, √(2·m·tol)).

    The gradient threshold yields f(θ) − f* ≤ tol through the gradient
    dominance inequality ‖∇f‖² ≥ 2m(f − f*), and it keeps ``grad_norm ≤ tol``.
    """

    if cert.m <= 0:
        raise DomainError("gradient descent stopping rule needs a strictly positive m")
    if tol <= 0:
        raise DomainError("tolerance must be positive")

    threshold = min(tol, math.sqrt(2.0 * cert.m * tol))
    theta = np.array(x0, dtype=float)
    grad = model.gradient(theta)
    grad_norm = float(np.linalg.norm(grad))

    # f(θ⁰) − f* ≤ (M/2)‖∇f(θ⁰)‖²/m² stands in for the unknown gap.
    f_gap = 0.5 * cert.M * grad_norm**2 / cert.m**2
    cap = gd_iteration_cap(cert.m, cert.M, f_gap, (threshold / cert.M) ** 2)
    step = 1.0 / (2.0 * cert.M)

    iterations = 0
    while grad_norm > threshold:
        if iterations >= cap:
            raise NonConvergenceError(
                f"gradient descent on '{model.tag}' did not reach ‖∇f‖ ≤ {threshold:.3e} "
                f"within {cap} iterations (last ‖∇f‖ = {grad_norm:.3e})",
                last_iterate=theta,
                iterations=iterations,
            )
        theta = theta - step * grad
        grad = model.gradient(theta)
        grad_norm = float(np.linalg.norm(grad))
        if not math.isfinite(grad_norm):
            raise EvaluationError(
                f"gradient of '{model.tag}' became non-finite at iteration {iterations}"
            )
        iterations += 1

    f_star = model.potential(theta)
    logger.debug(
        f"Gradient descent on '{model.tag}' stopped after {iterations} iterations "
        f"(cap {cap}, ‖∇f‖ = {grad_norm:.3e})"
    )
    return StationaryPoint(
        theta_star=theta, f_star=f_star, grad_norm=grad_norm, iterations=iterations
    )
