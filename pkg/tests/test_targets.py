from pathlib import Path
import math
import sys

sys.path.append(str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np
import pytest

from certified_lmc.core.errors import DomainError
from certified_lmc.core.model import certificate_probe, fd_gradient_check, fd_hessian_check
from certified_lmc.core.optimize import minimize_gd
from certified_lmc.core.transforms import convexified_tv_budget
from certified_lmc.targets import (
    GaussianMixtureTarget,
    LogisticGenConfig,
    LogisticTarget,
    logistic_certificate,
    logistic_default_lambda,
    logistic_generate,
    logistic_lipschitz_hessian,
    logistic_m_R,
    logistic_model,
    logistic_mu_R,
    logistic_optimal_R,
    mixture_certificate,
    mixture_cstar,
    mixture_direct_sample,
    mixture_projection_cdf,
    mixture_vector,
)


@pytest.fixture(scope="module")
def logistic_data() -> tuple[np.ndarray, np.ndarray]:
    return logistic_generate(LogisticGenConfig(p=3, n=200, seed=7))


@pytest.fixture(scope="module")
def logistic_setup(logistic_data):
    X, Y = logistic_data
    model, cert, preconditioner = logistic_model(X, Y)
    mode = minimize_gd(model, cert, np.zeros(3), tol=1e-8)
    return model, cert, mode.theta_star


def test_mixture_vector_has_requested_norm() -> None:
    a = mixture_vector(8, 0.5)
    assert a @ a == pytest.approx(0.5)
    assert np.allclose(a, a[0])


def test_mixture_evaluators_agree_with_finite_differences() -> None:
    model = GaussianMixtureTarget(mixture_vector(5))
    for x in (np.zeros(5), np.linspace(-2.0, 2.0, 5), 3.0 * np.ones(5)):
        assert fd_gradient_check(model, x) < 1e-6
        assert fd_hessian_check(model, x) < 1e-5


def test_mixture_structured_hessian_matches_dense() -> None:
    a = mixture_vector(4)
    model = GaussianMixtureTarget(a)
    x = np.array([0.4, -1.0, 2.0, 0.1])
    eigvals, eigvecs = model.structured_hessian(x)
    np.testing.assert_allclose((eigvecs * eigvals) @ eigvecs.T, model.hessian(x), atol=1e-12)
    np.testing.assert_allclose(eigvecs.T @ eigvecs, np.eye(4), atol=1e-12)
    s = 2.0 * x @ a
    top = 1.0 - 0.5 * 4.0 * math.exp(s) / (1.0 + math.exp(s)) ** 2
    assert eigvals[0] == pytest.approx(top)
    np.testing.assert_allclose(eigvals[1:], 1.0)


def test_mixture_hessian_rows_and_products_are_consistent() -> None:
    model = GaussianMixtureTarget(mixture_vector(3))
    rng = np.random.default_rng(0)
    xs = rng.standard_normal((6, 3))
    vs = rng.standard_normal((6, 3))
    hessians = model.hessian_rows(xs)
    for i in range(6):
        np.testing.assert_allclose(hessians[i], model.hessian(xs[i]), atol=1e-12)
    np.testing.assert_allclose(
        model.hvp_rows(xs, vs), np.einsum("nij,nj->ni", hessians, vs), atol=1e-12
    )


def test_mixture_certificate_constants() -> None:
    cert = mixture_certificate(mixture_vector(8))
    assert cert.m == pytest.approx(0.5)
    assert cert.M == 1.0
    assert cert.L_f == pytest.approx(0.5 * 0.5**1.5)
    with pytest.raises(DomainError):
        mixture_certificate(mixture_vector(2, 1.0))


def test_mixture_direct_sampler_moments() -> None:
    a = mixture_vector(3)
    rng = np.random.default_rng(11)
    draws = np.vstack([mixture_direct_sample(a, rng) for _ in range(20_000)])
    np.testing.assert_allclose(draws.mean(axis=0), 0.0, atol=0.05)
    np.testing.assert_allclose(np.cov(draws.T), np.eye(3) + np.outer(a, a), atol=0.06)


def test_mixture_mode_coefficient() -> None:
    assert mixture_cstar(0.5) == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(DomainError):
        mixture_cstar(1.0)


def test_mixture_projection_cdf_is_symmetric() -> None:
    cdf = mixture_projection_cdf(math.sqrt(0.5))
    assert cdf(np.array([0.0]))[0] == pytest.approx(0.5)
    values = cdf(np.array([-1.3, 1.3]))
    assert values[0] + values[1] == pytest.approx(1.0)


def test_logistic_generator_rows_have_unit_norm(logistic_data) -> None:
    X, Y = logistic_data
    assert X.shape == (200, 3)
    np.testing.assert_allclose(np.linalg.norm(X, axis=1), 1.0)
    assert set(np.unique(Y)) <= {0.0, 1.0}
    again, _ = logistic_generate(LogisticGenConfig(p=3, n=200, seed=7))
    np.testing.assert_array_equal(X, again)


def test_logistic_default_lambda() -> None:
    assert logistic_default_lambda(10) == pytest.approx(30.0 / math.pi**2)


def test_logistic_rejects_bad_labels(logistic_data) -> None:
    X, Y = logistic_data
    with pytest.raises(DomainError):
        LogisticTarget(X, Y * 2.0, lam=1.0)
    with pytest.raises(DomainError):
        LogisticTarget(X, Y[:-1], lam=1.0)


def test_logistic_evaluators_agree_with_finite_differences(logistic_data) -> None:
    X, Y = logistic_data
    target = LogisticTarget(X, Y, lam=logistic_default_lambda(3))
    model, _, _ = logistic_model(X, Y)
    theta = np.array([0.5, -0.2, 1.0])
    assert fd_gradient_check(target, theta) < 1e-5
    assert fd_hessian_check(target, theta) < 1e-5
    assert fd_gradient_check(model, theta) < 1e-5
    assert fd_hessian_check(model, theta) < 1e-5


def test_logistic_preconditioned_rows_are_whitened(logistic_data) -> None:
    X, Y = logistic_data
    target = LogisticTarget(X, Y, lam=1.0)
    rows = target.preconditioned_rows
    np.testing.assert_allclose(rows.T @ rows / target.n, np.eye(3), atol=1e-10)


def test_logistic_certificate_holds_on_random_pairs(logistic_setup) -> None:
    model, cert, theta_star = logistic_setup
    assert cert.m == pytest.approx(logistic_default_lambda(3))
    assert cert.M == pytest.approx(cert.m + 50.0)
    report = certificate_probe(model, cert, n_pairs=300, seed=3, center=theta_star)
    assert report.passed


def test_logistic_lipschitz_tight_is_below_coarse(logistic_data) -> None:
    X, Y = logistic_data
    bounds = logistic_lipschitz_hessian(LogisticTarget(X, Y, lam=1.0))
    assert 0.0 < bounds.tight <= bounds.coarse
    assert logistic_certificate(LogisticTarget(X, Y, lam=1.0)).L_f == bounds.tight


def test_local_convexity_decreases_with_radius(logistic_setup) -> None:
    model, cert, theta_star = logistic_setup
    radii = [0.0, 0.5, 1.0, 2.0, 5.0, 20.0]
    values = [logistic_m_R(model, theta_star, R) for R in radii]
    assert all(later <= earlier + 1e-12 for earlier, later in zip(values, values[1:]))
    assert values[-1] >= cert.m
    assert values[0] <= cert.M


def test_fourth_moment_scale_decreases_with_radius(logistic_setup) -> None:
    model, cert, theta_star = logistic_setup
    m_R = logistic_m_R(model, theta_star, 1.0)
    values = [logistic_mu_R(3, m_R, cert.M, R) for R in (0.5, 1.0, 2.0, 4.0)]
    assert all(later < earlier for earlier, later in zip(values, values[1:]))
    with pytest.raises(DomainError):
        logistic_mu_R(3, m_R, cert.M, 0.0)


def test_optimal_radius_improves_on_global_constant(logistic_setup) -> None:
    model, cert, theta_star = logistic_setup
    eps = 0.1
    radius = logistic_optimal_R(model, theta_star, eps)
    R_max = 10.0 / math.sqrt(cert.m)
    assert R_max / 200.0 <= radius.R <= R_max
    assert radius.barm >= cert.m
    assert radius.barm == pytest.approx(min(radius.m_2R, cert.m + 0.5 * radius.gamma))
    assert convexified_tv_budget(radius.gamma, 3, radius.mu_R) == pytest.approx(eps / 2.0)


def test_optimal_radius_rejects_bad_eps(logistic_setup) -> None:
    model, _, theta_star = logistic_setup
    with pytest.raises(DomainError):
        logistic_optimal_R(model, theta_star, 0.75)
