from pathlib import Path
import math
import sys
from typing import Callable

sys.path.append(str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np
import pytest

from certified_lmc.core.errors import DomainError, InfeasiblePlanError
from certified_lmc.core.planner import (
    kl_discretization_bound_gaussian_start,
    mixing_bound,
    plan_convexified,
    plan_for,
    plan_lmc,
    plan_lmc_warm,
    plan_lmco,
    preconditioned_lmc_iterations,
    tv_bound_lmc,
    tv_bound_lmc_warm,
    tv_bound_lmco,
)
from certified_lmc.models.plans import AlgorithmTag, WarmStartSpec

MIXTURE_L_F = 0.5 * 0.5**1.5


def test_mixing_bound_values() -> None:
    assert mixing_bound(0.0, 1.0, 4.0) == pytest.approx(1.0)
    assert mixing_bound(2.0 * math.log(10.0), 1.0, 1.0) == pytest.approx(0.05)
    # Gaussian start with p = 4 and M/m = 2 has chi2 = (M/m)^{p/2} = 4
    assert mixing_bound(4.0, 1.0, 2.0**2) == pytest.approx(math.exp(-2.0))


def test_mixing_bound_rejects_nonpositive_m() -> None:
    with pytest.raises(DomainError):
        mixing_bound(1.0, 0.0, 1.0)


def test_kl_discretization_bound_closed_form() -> None:
    assert kl_discretization_bound_gaussian_start(10, 0.1, 2, 1.0, 1.0, 1.0) == pytest.approx(0.1)
    large_alpha = kl_discretization_bound_gaussian_start(10**6, 1e-6, 2, 1.0, 1.0, 1e5)
    unit_alpha = kl_discretization_bound_gaussian_start(10**6, 1e-6, 2, 1.0, 1.0, 1.0)
    assert large_alpha / unit_alpha == pytest.approx(0.5, rel=1e-4)


def test_kl_discretization_bound_requires_small_step() -> None:
    with pytest.raises(DomainError):
        kl_discretization_bound_gaussian_start(10, 2.0, 2, 1.0, 1.0, 1.0)


def test_tv_bound_lmc_equal_constants_gives_half_eps() -> None:
    eps = 0.2
    T = 2.0 * math.log(1.0 / eps)
    value = tv_bound_lmc(T, 1e-12, 3, 1.0, 1.0, 1.0)
    assert value == pytest.approx(eps / 2.0, rel=1e-5)


def test_tv_bound_lmc_step_doubling_scales_discretization() -> None:
    T, p, m, M = 50.0, 4, 1.0, 1.0
    mixing = tv_bound_lmc(T, 1e-300, p, m, M, 1.0)
    first = tv_bound_lmc(T, 0.01, p, m, M, 1.0) - mixing
    second = tv_bound_lmc(T, 0.02, p, m, M, 1.0) - mixing
    assert second / first == pytest.approx(math.sqrt(2.0), rel=1e-9)


@pytest.mark.parametrize(
    "p, reference",
    [(8, 87), (12, 184), (16, 329), (20, 532), (30, 1350), (40, 2728), (60, 7741)],
)
def test_plan_lmc_matches_reported_iteration_counts(p: int, reference: int) -> None:
    plan = plan_lmc(p, 0.5, 1.0, 0.1)
    assert plan.K == pytest.approx(reference * 1000, rel=0.02)
    assert plan.certified


def test_plan_lmc_hand_evaluated_small_case() -> None:
    plan = plan_lmc(2, 1.0, 1.0, 0.5)
    assert plan.T == pytest.approx(2.0 * math.log(2.0), rel=1e-9)
    assert plan.alpha == pytest.approx(6.045, rel=1e-3)
    assert plan.h == pytest.approx(0.1654, rel=1e-3)
    assert plan.K == 9


def test_plan_lmc_summands_each_within_half_eps() -> None:
    plan = plan_lmc(8, 0.5, 1.0, 0.1)
    assert plan.predicted_tv is not None and plan.predicted_tv <= 0.1 * (1 + 1e-9)
    mixing = 0.5 * math.exp(2.0 * math.log(2.0) - 0.25 * plan.T)
    assert mixing <= 0.05 * (1 + 1e-9)
    assert plan.predicted_tv - mixing <= 0.05 * (1 + 1e-9)
    assert plan.h <= 1.0 / (plan.alpha * 1.0) * (1 + 1e-9)


@pytest.mark.parametrize("eps", [0.6, 0.0, -0.1])
def test_plan_lmc_rejects_eps_outside_range(eps: float) -> None:
    with pytest.raises(DomainError):
        plan_lmc(8, 0.5, 1.0, eps)


def test_plan_lmc_rejects_m_above_M() -> None:
    with pytest.raises(DomainError):
        plan_lmc(2, 2.0, 1.0, 0.1)


def test_plan_lmc_warm_hand_evaluated() -> None:
    warm = WarmStartSpec(chi2_bound=1.0, mu2=1.0)
    plan = plan_lmc_warm(2, 1.0, 1.0, 0.1, warm)
    assert plan.T == pytest.approx(2.0 * math.log(10.0), rel=1e-9)
    assert plan.h == pytest.approx(1.396e-3, rel=1e-3)
    assert plan.K == math.floor(plan.T / plan.h)
    assert abs(plan.K - 3299) <= 1
    assert plan.predicted_tv is not None and plan.predicted_tv <= 0.1


def test_plan_lmc_warm_horizon_independent_of_dimension() -> None:
    warm = WarmStartSpec(chi2_bound=1.0, mu2=1.0)
    small = plan_lmc_warm(2, 1.0, 1.0, 0.1, warm)
    large = plan_lmc_warm(8, 1.0, 1.0, 0.1, warm)
    assert small.T == pytest.approx(large.T)
    assert large.K == pytest.approx(4 * small.K, abs=4)


def test_plan_lmc_warm_chi2_shift() -> None:
    base = plan_lmc_warm(2, 1.0, 1.0, 0.1, WarmStartSpec(chi2_bound=1.0, mu2=1.0))
    shifted = plan_lmc_warm(2, 1.0, 1.0, 0.1, WarmStartSpec(chi2_bound=math.e**2, mu2=1.0))
    assert shifted.T - base.T == pytest.approx(2.0)


def test_plan_lmc_warm_rejects_tiny_budget() -> None:
    # a start already within eps leaves no horizon to run
    with pytest.raises(InfeasiblePlanError):
        plan_lmc_warm(2, 1.0, 1.0, 0.5, WarmStartSpec(chi2_bound=0.1, mu2=1.0))


def test_tv_bound_lmc_warm_needs_half_step() -> None:
    with pytest.raises(DomainError):
        tv_bound_lmc_warm(1.0, 0.9, 2, 1.0, 1.0, WarmStartSpec(chi2_bound=1.0, mu2=1.0))


def test_plan_lmco_mixture_dimension_eight() -> None:
    plan = plan_lmco(8, 0.5, 1.0, MIXTURE_L_F, 0.1)
    assert plan.T == pytest.approx(14.7555, rel=1e-4)
    assert 1.0 / plan.h == pytest.approx(116.2, rel=2e-3)
    assert abs(plan.K - 1715) <= 1
    # reported value is 3e3; same order of magnitude
    assert 1500 <= plan.K <= 6000
    assert plan.certified


def test_plan_lmco_without_hessian_variation_uses_eight_M() -> None:
    plan = plan_lmco(4, 0.5, 1.0, 0.0, 0.1)
    assert plan.h == pytest.approx(1.0 / 8.0)
    assert plan.K == math.floor(8.0 * plan.T)


def test_plan_lmco_first_branch_scales_with_eps() -> None:
    L_f = 50.0
    coarse = plan_lmco(8, 0.5, 1.0, L_f, 0.4)
    fine = plan_lmco(8, 0.5, 1.0, L_f, 0.05)
    first_branch = lambda plan: (6.0 * L_f * plan.T * 8 / plan.eps) ** (2.0 / 3.0)  # noqa: E731
    assert first_branch(fine) / first_branch(coarse) == pytest.approx(
        4.0 * (fine.T / coarse.T) ** (2.0 / 3.0)
    )


def test_tv_bound_lmco_discretization_budget() -> None:
    T, h = 14.7555, 1.0 / 116.2
    mixing = tv_bound_lmco(T, h, 8, 0.5, 1.0, 0.0)
    total = tv_bound_lmco(T, h, 8, 0.5, 1.0, MIXTURE_L_F)
    assert total - mixing <= 0.05
    assert mixing == pytest.approx(0.5 * math.exp(2.0 * math.log(2.0) - 0.25 * T))


def test_tv_bound_lmco_rejects_large_step() -> None:
    with pytest.raises(DomainError):
        tv_bound_lmco(10.0, 0.5, 8, 0.5, 1.0, 0.1)


def test_plan_convexified_formula() -> None:
    plan = plan_convexified(2, 1.0, 1.0, 0.2)
    assert plan.T == pytest.approx(2.0 * math.log(10.0), rel=1e-9)
    assert plan.h == pytest.approx(0.04 / (8.0 * plan.T), rel=1e-9)
    assert plan.K == math.ceil(plan.T / plan.h)
    assert plan.predicted_tv == pytest.approx(0.2, rel=1e-6)


def test_plan_convexified_scaling() -> None:
    base = plan_convexified(2, 1.0, 1.0, 0.2)
    stiffer = plan_convexified(2, 1.0, 2.0, 0.2)
    assert base.h * base.T / (stiffer.h * stiffer.T) == pytest.approx(4.0)
    tighter = plan_convexified(2, 1.0, 1.0, 0.1)
    assert tighter.T - base.T == pytest.approx(2.0 * math.log(2.0))


def test_plan_convexified_uses_supplied_approximation_budget() -> None:
    plan = plan_convexified(2, 1.0, 1.0, 0.2, approximation_tv=0.01)
    assert plan.predicted_tv is not None and plan.predicted_tv < 0.2


def test_preconditioned_iterations_grow_with_condition_number() -> None:
    assert preconditioned_lmc_iterations(2, 1.0, 2.0, 0.1) < preconditioned_lmc_iterations(
        2, 1.0, 4.0, 0.1
    )


def test_plan_for_dispatch() -> None:
    assert plan_for(AlgorithmTag.LMC, p=8, m=0.5, M=1.0, eps=0.1).algo is AlgorithmTag.LMC
    lmco = plan_for(AlgorithmTag.LMCO, p=8, m=0.5, M=1.0, eps=0.1, L_f=MIXTURE_L_F)
    assert lmco.K == plan_lmco(8, 0.5, 1.0, MIXTURE_L_F, 0.1).K
    with pytest.raises(DomainError):
        plan_for(AlgorithmTag.LMCO, p=8, m=0.5, M=1.0, eps=0.1)
    with pytest.raises(DomainError):
        plan_for(AlgorithmTag.LMC_WARM, p=8, m=0.5, M=1.0, eps=0.1)


@pytest.mark.parametrize(
    "call",
    [
        lambda: plan_lmc(1, 1.0, 1.0, 0.1),
        lambda: plan_lmc_warm(1, 1.0, 1.0, 0.1, WarmStartSpec(chi2_bound=1.0, mu2=1.0)),
        lambda: plan_convexified(1, 1.0, 1.0, 0.1),
        lambda: plan_lmco(1, 0.5, 1.0, 0.1, 0.1),
        lambda: tv_bound_lmc(10.0, 0.01, 1, 1.0, 1.0, 1.0),
    ],
)
def test_planners_require_dimension_two(call: Callable[[], object]) -> None:
    with pytest.raises(DomainError):
        call()


def test_tv_bounds_increase_with_step_size() -> None:
    steps = np.geomspace(1e-4, 0.1, 25)
    lmc = [tv_bound_lmc(20.0, h, 4, 0.5, 1.0, 1.0) for h in steps]
    lmco = [tv_bound_lmco(20.0, h, 4, 0.5, 1.0, MIXTURE_L_F) for h in steps]
    assert np.all(np.diff(lmc) > 0)
    assert np.all(np.diff(lmco) > 0)


def test_tv_bounds_increase_with_dimension() -> None:
    dims = range(2, 41)
    lmc = [tv_bound_lmc(20.0, 0.01, p, 0.5, 1.0, 1.0) for p in dims]
    lmco = [tv_bound_lmco(20.0, 0.01, p, 0.5, 1.0, MIXTURE_L_F) for p in dims]
    assert np.all(np.diff(lmc) > 0)
    assert np.all(np.diff(lmco) > 0)


def test_mixing_bound_decreases_with_horizon() -> None:
    values = [mixing_bound(t, 0.5, 4.0) for t in np.linspace(0.0, 40.0, 50)]
    assert np.all(np.diff(values) < 0)
    assert values[0] == pytest.approx(1.0)
