"""Nonasymptotic total-variation bounds and the planners that invert them.

Every planner returns a :class:`SamplerPlan` whose ``predicted_tv`` is the
relevant bound evaluated at the planned horizon and step-size. Bounds are
computed in 64-bit floats with the exponential mixing term assembled in
log-space, since ``p·ln(M/m)`` easily exceeds the range of ``exp``.
"""

from __future__ import annotations

import math
from typing import Optional

from certified_lmc.core.errors import DomainError, InfeasiblePlanError
from certified_lmc.core.logging import get_logger
from certified_lmc.models.plans import AlgorithmTag, SamplerPlan, WarmStartSpec

logger = get_logger(__name__)

# relative slack for preconditions that the planners meet with equality
_REL_TOL = 1e-9
_MAX_EXP = 700.0


def _le(a: float, b: float) -> bool:
    return a <= b * (1.0 + _REL_TOL) + 1e-300


def _safe_exp(value: float) -> float:
    return math.inf if value > _MAX_EXP else math.exp(value)


def _check_eps(eps: float) -> None:
    if not (0.0 < eps <= 0.5):
        raise DomainError(f"precision eps must lie in (0, 1/2], got {eps}")


def _check_constants(m: float, M: float) -> None:
    if not (m > 0.0 and M > 0.0 and _le(m, M)):
        raise DomainError(f"constants must satisfy 0 < m <= M, got m={m}, M={M}")


def _check_dimension(p: int) -> None:
    if p < 2:
        raise DomainError(f"guarantees are stated for dimension p >= 2, got {p}")


def _mixing_term(T: float, p: int, m: float, M: float) -> float:
    """½·exp{(p/4)·ln(M/m) − Tm/2}, the Gaussian-start mixing error."""
    return _safe_exp(math.log(0.5) + 0.25 * p * math.log(M / m) - 0.5 * T * m)


def _gaussian_start_horizon(p: int, m: float, M: float, eps: float) -> float:
    return (4.0 * math.log(1.0 / eps) + p * math.log(M / m)) / (2.0 * m)


def mixing_bound(t: float, m: float, chi2: float) -> float:
    """TV distance after time t of the diffusion started from a law with divergence chi2."""

    if m <= 0.0:
        raise DomainError("mixing bound is vacuous for m <= 0")
    if t < 0.0 or chi2 < 0.0:
        raise DomainError("mixing bound needs t >= 0 and chi2 >= 0")
    return 0.5 * math.sqrt(chi2) * math.exp(-0.5 * t * m)


def kl_discretization_bound_gaussian_start(
    K: int, h: float, p: int, m: float, M: float, alpha: float
) -> float:
    """KL divergence between K Euler steps and the diffusion, Gaussian start."""

    _check_dimension(p)
    _check_constants(m, M)
    if alpha < 1.0 or not _le(alpha, K):
        raise DomainError(f"discretization bound needs K >= alpha >= 1, got K={K}, alpha={alpha}")
    if h <= 0.0 or not _le(h, 1.0 / (alpha * M)):
        raise DomainError(f"discretization bound needs 0 < h <= 1/(alpha*M), got h={h}")
    T = K * h
    return p * M**2 * T * h * alpha / (2.0 * (2.0 * alpha - 1.0))


def tv_bound_lmc(T: float, h: float, p: int, m: float, M: float, alpha: float) -> float:
    """Gaussian-start TV bound for LMC: mixing error plus discretization error."""

    _check_dimension(p)
    _check_constants(m, M)
    if alpha < 1.0:
        raise DomainError(f"alpha must be at least 1, got {alpha}")
    if T <= 0.0 or h <= 0.0:
        raise DomainError("T and h must be positive")
    if not _le(h, 1.0 / (alpha * M)):
        raise DomainError(f"TV bound needs h <= 1/(alpha*M), got h={h}, alpha={alpha}, M={M}")
    if not _le(alpha, T / h):
        raise DomainError(f"TV bound needs T/h >= alpha, got T/h={T / h}, alpha={alpha}")
    discretization = math.sqrt(p * M**2 * T * h * alpha / (4.0 * (2.0 * alpha - 1.0)))
    return _mixing_term(T, p, m, M) + discretization


def plan_lmc(p: int, m: float, M: float, eps: float) -> SamplerPlan:
    """Horizon, step-size and ⌈T/h⌉ iterations of LMC started at N(θ*, M⁻¹I)."""

    _check_dimension(p)
    _check_constants(m, M)
    _check_eps(eps)

    T = _gaussian_start_horizon(p, m, M, eps)
    alpha = 0.5 * (1.0 + M * p * T / eps**2)
    h = eps**2 * (2.0 * alpha - 1.0) / (M**2 * T * p * alpha)
    K = math.ceil(T / h)
    plan = SamplerPlan(
        algo=AlgorithmTag.LMC,
        T=T,
        h=h,
        K=K,
        alpha=alpha,
        eps=eps,
        predicted_tv=tv_bound_lmc(T, h, p, m, M, alpha),
        inputs={"p": p, "m": m, "M": M},
    )
    return _finalise(plan)


def tv_bound_lmc_warm(
    T: float, h: float, p: int, m: float, M: float, warm: WarmStartSpec
) -> float:
    """TV bound for LMC started from a law with known χ² divergence and second moment.

    ½·exp{(ln χ² − Tm)/2} + √((M²h²pμ₂ + 6pM²Th)/36), valid for h <= 1/(2M).
    """

    _check_dimension(p)
    _check_constants(m, M)
    if T <= 0.0 or h <= 0.0:
        raise DomainError("T and h must be positive")
    if not _le(h, 1.0 / (2.0 * M)):
        raise DomainError(f"warm-start bound needs h <= 1/(2M), got h={h}")
    mixing = _safe_exp(math.log(0.5) + 0.5 * (math.log(warm.chi2_bound) - T * m))
    discretization = math.sqrt(
        (M**2 * h**2 * p * warm.mu2 + 6.0 * p * M**2 * T * h) / 36.0
    )
    return mixing + discretization


def plan_lmc_warm(
    p: int, m: float, M: float, eps: float, warm: WarmStartSpec
) -> SamplerPlan:
    """Warm-start plan: T = (2ln(1/ε) + ln χ²)/m, h = 9ε²/(TM²p(6+μ₂)), K = ⌊T/h⌋."""

    _check_dimension(p)
    _check_constants(m, M)
    _check_eps(eps)

    T = (2.0 * math.log(1.0 / eps) + math.log(warm.chi2_bound)) / m
    if T <= 0.0:
        raise InfeasiblePlanError(
            f"warm start is already within eps (chi2={warm.chi2_bound}); horizon T={T} <= 0"
        )
    h = 9.0 * eps**2 / (T * M**2 * p * (6.0 + warm.mu2))
    K = math.floor(T / h)
    if K < 2:
        raise InfeasiblePlanError(f"warm-start plan needs K = [T/h] >= 2, got K={K}")
    plan = SamplerPlan(
        algo=AlgorithmTag.LMC_WARM,
        T=T,
        h=h,
        K=K,
        eps=eps,
        predicted_tv=tv_bound_lmc_warm(T, h, p, m, M, warm),
        inputs={"p": p, "m": m, "M": M, "chi2": warm.chi2_bound, "mu2": warm.mu2},
    )
    return _finalise(plan)


def tv_bound_lmco(T: float, h: float, p: int, m: float, M: float, L_f: float) -> float:
    """Gaussian-start TV bound for the Ozaki discretisation (Hessian-Lipschitz targets)."""

    _check_dimension(p)
    _check_constants(m, M)
    if L_f < 0.0:
        raise DomainError("Hessian Lipschitz constant must be nonnegative")
    if h <= 0.0 or not _le(h, 1.0 / (8.0 * M)):
        raise DomainError(f"LMCO bound needs 0 < h <= 1/(8M), got h={h}")
    if not _le(4.0 / (3.0 * M), T):
        raise DomainError(f"LMCO bound needs T >= 4/(3M), got T={T}")
    discretization = math.sqrt(
        L_f**2 * T * h**2 * p**2 * (0.267 * M**2 * h * T + 0.375)
    )
    return _mixing_term(T, p, m, M) + discretization


def plan_lmco(p: int, m: float, M: float, L_f: float, eps: float) -> SamplerPlan:
    """Ozaki plan: Gaussian-start horizon with the largest step the LMCO bound allows.

    h⁻¹ = max{(6·L_f·M·T·p/ε)^{2/3}, 1.25·√T·L_f·p/ε, 8M} and K = ⌊T/h⌋.
    """

    _check_dimension(p)
    _check_constants(m, M)
    _check_eps(eps)
    if L_f < 0.0:
        raise DomainError("Hessian Lipschitz constant must be nonnegative")

    T = _gaussian_start_horizon(p, m, M, eps)
    inv_h = max(
        (6.0 * L_f * M * T * p / eps) ** (2.0 / 3.0),
        1.25 * math.sqrt(T) * L_f * p / eps,
        8.0 * M,
    )
    h = 1.0 / inv_h
    plan = SamplerPlan(
        algo=AlgorithmTag.LMCO,
        T=T,
        h=h,
        K=math.floor(T / h),
        eps=eps,
        predicted_tv=tv_bound_lmco(T, h, p, m, M, L_f),
        inputs={"p": p, "m": m, "M": M, "L_f": L_f},
    )
    return _finalise(plan)


def plan_convexified(
    p: int,
    barm: float,
    barM: float,
    eps: float,
    approximation_tv: Optional[float] = None,
) -> SamplerPlan:
    """LMC plan for a strongly convexified surrogate, spending ε/2 on sampling it.

    T = (4ln(2/ε) + p·ln(M̄/m̄))/(2m̄), h = ε²/(4M̄²Tp), K = ⌈T/h⌉. The
    surrogate's own distance to the target (``approximation_tv``, ε/2 unless
    given) is added to ``predicted_tv``.
    """

    _check_dimension(p)
    _check_constants(barm, barM)
    _check_eps(eps)
    approximation = 0.5 * eps if approximation_tv is None else approximation_tv
    if approximation < 0.0:
        raise DomainError("approximation budget must be nonnegative")

    T = (4.0 * math.log(2.0 / eps) + p * math.log(barM / barm)) / (2.0 * barm)
    h = eps**2 / (4.0 * barM**2 * T * p)
    plan = SamplerPlan(
        algo=AlgorithmTag.LMC_CONVEXIFIED,
        T=T,
        h=h,
        K=math.ceil(T / h),
        alpha=1.0,
        eps=eps,
        predicted_tv=tv_bound_lmc(T, h, p, barm, barM, 1.0) + approximation,
        inputs={"p": p, "m": barm, "M": barM, "approximation_tv": approximation},
    )
    return _finalise(plan)


def preconditioned_lmc_iterations(p: int, m_A: float, M_A: float, eps: float) -> float:
    """Closed-form LMC iteration count in terms of the preconditioned constants."""

    _check_dimension(p)
    _check_constants(m_A, M_A)
    _check_eps(eps)
    ratio = M_A / m_A
    return ratio**2 * p * eps**-2 * (2.0 * math.log(1.0 / eps) + 0.5 * p * math.log(ratio)) ** 2


def plan_for(
    algo: AlgorithmTag,
    *,
    p: int,
    m: float,
    M: float,
    eps: float,
    L_f: Optional[float] = None,
    warm: Optional[WarmStartSpec] = None,
    approximation_tv: Optional[float] = None,
) -> SamplerPlan:
    """Dispatch to the planner of ``algo``."""

    if algo is AlgorithmTag.LMC:
        return plan_lmc(p, m, M, eps)
    if algo is AlgorithmTag.LMC_WARM:
        if warm is None:
            raise DomainError("warm-start planning needs chi2 and mu2")
        return plan_lmc_warm(p, m, M, eps, warm)
    if algo is AlgorithmTag.LMC_CONVEXIFIED:
        return plan_convexified(p, m, M, eps, approximation_tv)
    if L_f is None:
        raise DomainError("LMCO planning needs the Hessian Lipschitz constant L_f")
    return plan_lmco(p, m, M, L_f, eps)


def _finalise(plan: SamplerPlan) -> SamplerPlan:
    """Re-assert the guarantee's preconditions on a freshly built plan."""

    M = plan.inputs["M"]
    if plan.algo is AlgorithmTag.LMC:
        assert plan.alpha is not None
        feasible = _le(plan.h, 1.0 / (plan.alpha * M)) and _le(plan.alpha, plan.K)
    elif plan.algo is AlgorithmTag.LMCO:
        feasible = _le(plan.h, 1.0 / (8.0 * M)) and _le(4.0 / (3.0 * M), plan.T)
    else:
        feasible = plan.K >= 1
    if not feasible or not plan.certified:
        raise InfeasiblePlanError(
            f"{plan.algo.value} plan violates its own guarantee: "
            f"T={plan.T}, h={plan.h}, K={plan.K}, predicted_tv={plan.predicted_tv}"
        )
    logger.debug(
        f"{plan.algo.value} plan: T={plan.T:.6g}, h={plan.h:.6g}, K={plan.K}, "
        f"predicted_tv={plan.predicted_tv:.6g} (eps={plan.eps})"
    )
    return plan
