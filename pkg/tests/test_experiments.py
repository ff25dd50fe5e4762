from pathlib import Path
import math
import sys

sys.path.append(str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np
import pytest

from certified_lmc.core.config import AppSettings
from certified_lmc.core.diagnostics import energy_bound_check, ks_report, moment_check, project
from certified_lmc.core.errors import ConfigError
from certified_lmc.core.model import QuadraticTarget, certificate_probe
from certified_lmc.core.optimize import minimize_gd
from certified_lmc.core.planner import plan_lmc
from certified_lmc.core.samplers import fixed_init, gaussian_init, run_ensemble
from certified_lmc.core.services.experiments import ExperimentService
from certified_lmc.core.transforms import ConvexifySpec, convexify
from certified_lmc.models import (
    AlgorithmTag,
    ExperimentConfig,
    RunConfig,
    SamplerPlan,
    TargetKind,
)
from certified_lmc.targets import (
    GaussianMixtureTarget,
    LogisticGenConfig,
    logistic_generate,
    logistic_m_R,
    logistic_model,
    logistic_optimal_R,
    mixture_certificate,
    mixture_projection_cdf,
    mixture_vector,
)


@pytest.fixture()
def service() -> ExperimentService:
    return ExperimentService(settings=AppSettings(sampling={"threads": 2, "chunk_size": 128}))


def _mixture_ks(  # type: ignore[no-untyped-def]
    p: int, eps: float, n_chains: int, seed: int, threads: int = 1
):
    a = mixture_vector(p)
    cert = mixture_certificate(a)
    plan = plan_lmc(p, cert.m, cert.M, eps)
    samples = run_ensemble(
        GaussianMixtureTarget(a),
        plan,
        gaussian_init(np.zeros(p), cert.M),
        RunConfig(n_chains=n_chains, seed=seed),
        threads=threads,
        chunk_size=256,
    )
    a_norm = math.sqrt(0.5)
    return plan, ks_report(project(samples, a / a_norm), mixture_projection_cdf(a_norm), eps)


def test_certified_lmc_on_mixture_passes_ks() -> None:
    plan, report = _mixture_ks(p=2, eps=0.2, n_chains=1000, seed=2024)
    assert 500 <= plan.K <= 5000
    assert report.threshold == pytest.approx(0.2 + math.sqrt(math.log(40.0) / 2000.0))
    assert report.passed


@pytest.mark.slow
def test_certified_lmc_on_mixture_dimension_eight() -> None:
    plan, report = _mixture_ks(p=8, eps=0.1, n_chains=2500, seed=7, threads=4)
    assert plan.K == pytest.approx(87_000, rel=0.02)
    assert report.distance <= 0.13


def test_lmco_preserves_gaussian_law() -> None:
    H = np.diag([2.0, 0.5])
    model = QuadraticTarget(H)
    plan = SamplerPlan(algo=AlgorithmTag.LMCO, T=200 / 16, h=1 / 16, K=200, eps=0.1)
    scale = 1.0 / np.sqrt(np.diag(H))
    samples = run_ensemble(
        model,
        plan,
        lambda rng: scale * rng.standard_normal(2),
        RunConfig(n_chains=10_000, seed=31),
        chunk_size=1000,
    )
    report = moment_check(samples, np.zeros(2), np.linalg.inv(H))
    assert report.passed, report


def test_lmc_pooled_variance_matches_ar1() -> None:
    h = 0.1
    plan = SamplerPlan(algo=AlgorithmTag.LMC, T=15.0, h=h, K=150, eps=0.1)
    samples = run_ensemble(
        QuadraticTarget.isotropic(10),
        plan,
        fixed_init(np.zeros(10)),
        RunConfig(n_chains=10_000, seed=17),
        chunk_size=1000,
    )
    pooled = samples.data.ravel()
    expected = 1.0 / (1.0 - h / 2.0)
    standard_error = expected * math.sqrt(2.0 / pooled.size)
    assert abs(pooled.var() - expected) <= 4.0 * standard_error


def test_energy_bound_holds_along_planned_mixture_run() -> None:
    p = 8
    a = mixture_vector(p)
    cert = mixture_certificate(a)
    plan = plan_lmc(p, cert.m, cert.M, 0.1).model_copy(update={"K": 200})
    samples = run_ensemble(
        GaussianMixtureTarget(a),
        plan,
        gaussian_init(np.zeros(p), cert.M),
        RunConfig(n_chains=2000, seed=8),
        chunk_size=500,
    )
    report = energy_bound_check(samples, np.zeros(p), cert.m, cert.M, p, init_msd=p / cert.M)
    assert report.bound == pytest.approx(80.0)
    assert report.passed


def test_convexified_logistic_certificate_holds() -> None:
    X, Y = logistic_generate(LogisticGenConfig(p=2, n=200, seed=5))
    model, cert, _ = logistic_model(X, Y)
    theta_star = minimize_gd(model, cert, np.zeros(2), tol=1e-8).theta_star
    assert certificate_probe(model, cert, 10_000, seed=0, center=theta_star).passed

    radius = logistic_optimal_R(model, theta_star, 0.1)
    spec = ConvexifySpec(
        x0=theta_star,
        R=radius.R,
        gamma=radius.gamma,
        m_profile=lambda R: logistic_m_R(model, theta_star, R),
        mu_R=radius.mu_R,
        m_inf=cert.m,
    )
    convexified, convexified_cert = convexify(model, cert, spec)
    assert convexified_cert.m == pytest.approx(radius.barm)
    report = certificate_probe(convexified, convexified_cert, 10_000, seed=1, center=theta_star)
    assert report.passed


def test_sample_writes_reproducible_mixture_run(
    tmp_path: Path, service: ExperimentService
) -> None:
    config = ExperimentConfig(
        target=TargetKind.MIXTURE, p=2, eps=0.5, n_chains=30, seed=4, output=tmp_path / "a.csv"
    )
    first, path = service.sample(config)
    second, _ = service.sample(config.model_copy(update={"output": tmp_path / "b.csv"}))
    np.testing.assert_array_equal(first.data, second.data)
    assert path.read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert first.meta.config["resolved_seed"] == 4


def test_sample_convexified_mixture_requires_explicit_radius(
    tmp_path: Path, service: ExperimentService
) -> None:
    config = ExperimentConfig(
        target=TargetKind.MIXTURE,
        p=2,
        eps=0.5,
        n_chains=5,
        output=tmp_path / "c.csv",
        transform={"kind": "convexify"},
    )
    with pytest.raises(ConfigError):
        service.sample(config)
    explicit = config.model_copy(
        update={"transform": config.transform.model_copy(update={"R": 2.0, "gamma": 0.5})}
    )
    samples, _ = service.sample(explicit)
    assert samples.meta.transforms == ["convexify"]
    assert samples.meta.plan is not None
    assert samples.meta.plan.algo is AlgorithmTag.LMC_CONVEXIFIED


def test_sample_logistic_maps_back_to_original_scale(
    tmp_path: Path, service: ExperimentService
) -> None:
    config = ExperimentConfig(
        target=TargetKind.LOGISTIC,
        p=2,
        eps=0.5,
        n_chains=10,
        output=tmp_path / "logistic.csv",
        logistic={"n": 100, "data_seed": 3},
    )
    samples, _ = service.sample(config)
    assert samples.meta.transforms == ["precondition", "map_back"]
    assert samples.data.shape == (10, 2)


def test_table1_rows_carry_reported_counts(service: ExperimentService) -> None:
    rows = service.table1([8, 60], 0.1)
    lmc = [row for row in rows if row.algo == "LMC"]
    lmco = [row for row in rows if row.algo == "LMCO"]
    assert [row.reported_K for row in lmc] == [87_000, 7_741_000]
    assert all(row.reported_K is None for row in lmco)
    assert abs(lmco[0].K - 1715) <= 1
    assert all(row.predicted_tv <= 0.1 * (1 + 1e-9) for row in rows)
    assert all(row.reported_K is None for row in service.table1([8], 0.2))


@pytest.mark.parametrize("p", [2, 5])
def test_convexification_reduces_logistic_iterations(
    service: ExperimentService, p: int
) -> None:
    small = service.logistic_kk(p, 1000, 0.1, trials=10, seed=0)
    large = service.logistic_kk(p, 4000, 0.1, trials=10, seed=0)
    assert small.mean_K_prime < small.mean_K
    assert large.mean_K_prime < large.mean_K
    assert large.mean_K_prime < small.mean_K_prime
    assert [trial.seed for trial in small.trials] == list(range(10))


def test_convexification_gain_fades_in_high_dimension(service: ExperimentService) -> None:
    report = service.logistic_kk(20, 500, 0.1, trials=10, seed=0)
    assert report.mean_K_prime / report.mean_K >= 0.8


@pytest.mark.slow
def test_lmco2_tracks_lmc_on_logistic_posterior(service: ExperimentService) -> None:
    report = service.lmco2_compare(2, 200, 0.1, n_chains=100, seed=0)
    assert report.lmc_plan == "shared"
    assert report.K_lmc == report.K_lmco2
    for value in (report.d_mean, report.d_median, report.d_Q1, report.d_Q3):
        assert value <= 0.15


def test_lmco2_compare_small_run(service: ExperimentService) -> None:
    report = service.lmco2_compare(2, 200, 0.5, n_chains=10, seed=1)
    assert report.n_chains == 10
    assert report.K_lmco2 > 0
    assert report.d_mean >= 0.0


def test_diagnose_requires_reference_or_target(
    tmp_path: Path, service: ExperimentService
) -> None:
    config = ExperimentConfig(
        target=TargetKind.DIRECT_MIXTURE, p=2, n_chains=50, output=tmp_path / "d.csv"
    )
    _, path = service.sample(config)
    with pytest.raises(ConfigError):
        service.diagnose(path)
    report = service.diagnose(path, target=TargetKind.MIXTURE)
    assert report.ks is not None
    assert report.notes["target"] == "mixture"
