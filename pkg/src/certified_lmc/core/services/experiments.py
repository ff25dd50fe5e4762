"""Service coordinating planners, targets, transforms, samplers and diagnostics."""

from __future__ import annotations

import math
import time
from pathlib import Path
from typing import Dict, Iterable, List, Literal, Optional, Tuple

import numpy as np
import pandas as pd

from certified_lmc.adapters.csv import load_logistic_dataset, read_samples, write_samples
from certified_lmc.core.config import AppSettings
from certified_lmc.core.diagnostics import (
    ks_report,
    ks_two_sample,
    marginal_distances,
    moment_check,
    project,
)
from certified_lmc.core.errors import ConfigError
from certified_lmc.core.logging import get_logger
from certified_lmc.core.model import TargetModel
from certified_lmc.core.optimize import minimize_gd
from certified_lmc.core.planner import plan_convexified, plan_lmc, plan_lmco
from certified_lmc.core.samplers import chain_generator, gaussian_init, run_ensemble
from certified_lmc.core.transforms import (
    ConvexifySpec,
    convexified_tv_budget,
    convexify,
    map_back,
)
from certified_lmc.models.certificates import ConvexityCertificate
from certified_lmc.models.experiments import (
    ComparisonReport,
    ExperimentConfig,
    LogisticDataSpec,
    LogisticKKReport,
    LogisticTrial,
    SamplerKind,
    Table1Row,
    TargetKind,
)
from certified_lmc.models.plans import SamplerPlan
from certified_lmc.models.reports import DiagnosticReport, KSReport
from certified_lmc.models.samples import RunConfig, SampleMeta, SampleSet, UpdateRule
from certified_lmc.targets.logistic import (
    LogisticGenConfig,
    OptimalRadius,
    logistic_generate,
    logistic_m_R,
    logistic_model,
    logistic_mu_R,
    logistic_optimal_R,
)
from certified_lmc.targets.mixture import (
    GaussianMixtureTarget,
    mixture_certificate,
    mixture_cstar,
    mixture_direct_sample,
    mixture_projection_cdf,
    mixture_vector,
)

logger = get_logger(__name__)

MODE_TOLERANCE = 1e-6

# LMC iteration counts reported for the mixture with ‖a‖² = ½ and ε = 0.1
REPORTED_LMC_ITERATIONS: Dict[int, int] = {
    8: 87_000,
    12: 184_000,
    16: 329_000,
    20: 532_000,
    30: 1_350_000,
    40: 2_728_000,
    60: 7_741_000,
}

_UPDATE_RULES = {
    SamplerKind.LMC: UpdateRule.LMC,
    SamplerKind.LMCO: UpdateRule.LMCO,
    SamplerKind.LMCO2: UpdateRule.LMCO2,
}


class _LogisticSetup:
    """Preconditioned posterior with its certificate, preconditioner and mode."""

    def __init__(self, X: np.ndarray, Y: np.ndarray, lam: Optional[float]) -> None:
        self.model, self.cert, self.preconditioner = logistic_model(X, Y, lam)
        self.lam = self.cert.m
        self.p = self.model.dim
        self.n = int(X.shape[0])
        self.theta_star = minimize_gd(
            self.model, self.cert, np.zeros(self.p), MODE_TOLERANCE
        ).theta_star

    def m_profile(self, R: float) -> float:
        return logistic_m_R(self.model, self.theta_star, R)

    def convexified(
        self, eps: float, R: Optional[float] = None, gamma: Optional[float] = None
    ) -> Tuple[TargetModel, ConvexityCertificate, float, OptimalRadius]:
        """Convexified posterior, its certificate and its TV distance to the posterior."""
        if R is None:
            radius = logistic_optimal_R(self.model, self.theta_star, eps)
        else:
            mu_R = logistic_mu_R(self.p, self.m_profile(R), self.cert.M, R)
            chosen = 2.0 * eps / (self.p * mu_R) if gamma is None else gamma
            m_2R = self.m_profile(2.0 * R)
            radius = OptimalRadius(
                R=R,
                barm=min(m_2R, self.lam + 0.5 * chosen),
                gamma=chosen,
                mu_R=mu_R,
                m_2R=m_2R,
            )
        spec = ConvexifySpec(
            x0=self.theta_star,
            R=radius.R,
            gamma=radius.gamma,
            m_profile=self.m_profile,
            mu_R=radius.mu_R,
            m_inf=self.lam,
        )
        model, cert = convexify(self.model, self.cert, spec)
        budget = convexified_tv_budget(spec.gamma, self.p, spec.mu_R)
        return model, cert, budget, radius


class ExperimentService:
    """Run the reproducible experiments exposed by the command-line interface."""

    def __init__(self, *, settings: Optional[AppSettings] = None) -> None:
        self._settings = settings or AppSettings()

    @property
    def settings(self) -> AppSettings:
        return self._settings

    def _ensemble(
        self,
        model: TargetModel,
        plan: SamplerPlan,
        theta_star: np.ndarray,
        M: float,
        config: RunConfig,
    ) -> SampleSet:
        sampling = self._settings.sampling
        return run_ensemble(
            model,
            plan,
            gaussian_init(theta_star, M),
            config,
            threads=sampling.threads,
            chunk_size=sampling.chunk_size,
            progress=sampling.progress,
        )

    # sample ---------------------------------------------------------------------------------

    def sample(self, config: ExperimentConfig) -> Tuple[SampleSet, Path]:
        """Draw ``config.n_chains`` samples and write them with their provenance."""

        seed = self._settings.resolve_seed(config.seed)
        if config.target is TargetKind.DIRECT_MIXTURE:
            samples = self._sample_direct(config, seed)
        elif config.target is TargetKind.MIXTURE:
            samples = self._sample_mixture(config, seed)
        else:
            samples = self._sample_logistic(config, seed)

        samples.meta.config = config.model_dump(mode="json") | {"resolved_seed": seed}
        csv_path, meta_path = write_samples(samples, config.output)
        logger.info(f"Wrote {samples.n} samples to {csv_path} (metadata {meta_path})")
        return samples, csv_path

    def _sample_direct(self, config: ExperimentConfig, seed: int) -> SampleSet:
        a = mixture_vector(config.p, config.a_norm_sq)
        started = time.perf_counter()
        data = np.stack(
            [mixture_direct_sample(a, chain_generator(seed, i)) for i in range(config.n_chains)]
        )
        meta = SampleMeta(
            seed=seed,
            target=TargetKind.DIRECT_MIXTURE.value,
            n_chains=config.n_chains,
            algo="direct",
            wall_time_s=time.perf_counter() - started,
        )
        return SampleSet(data=data, meta=meta)

    def _plan_for_kind(
        self, kind: SamplerKind, p: int, cert: ConvexityCertificate, eps: float
    ) -> SamplerPlan:
        if kind is SamplerKind.LMC:
            return plan_lmc(p, cert.m, cert.M, eps)
        assert cert.L_f is not None
        return plan_lmco(p, cert.m, cert.M, cert.L_f, eps)

    def _sample_mixture(self, config: ExperimentConfig, seed: int) -> SampleSet:
        a = mixture_vector(config.p, config.a_norm_sq)
        model: TargetModel = GaussianMixtureTarget(a)
        cert = mixture_certificate(a)
        theta_star = (
            mixture_cstar(config.a_norm_sq) * a if config.a_norm_sq > 0 else np.zeros(config.p)
        )
        transforms: List[str] = []

        if config.transform is not None:
            block = config.transform
            if block.R is None or block.gamma is None:
                raise ConfigError("convexifying the mixture needs explicit R and gamma")
            spec = ConvexifySpec(x0=theta_star, R=block.R, gamma=block.gamma)
            model, cert = convexify(model, cert, spec)
            logger.warning("No fourth-moment bound for the mixture; assuming an ε/2 budget")
            plan = plan_convexified(config.p, cert.m, cert.M, config.eps)
            transforms.append("convexify")
        else:
            plan = self._plan_for_kind(config.algo, config.p, cert, config.eps)

        run = RunConfig(
            n_chains=config.n_chains,
            seed=seed,
            record_trajectory=config.record_trajectory,
            algo=_UPDATE_RULES[config.algo],
        )
        samples = self._ensemble(model, plan, theta_star, cert.M, run)
        samples.meta.transforms.extend(transforms)
        return samples

    def _logistic_setup(self, spec: LogisticDataSpec, p: int) -> _LogisticSetup:
        if spec.data_dir is not None:
            X, Y = load_logistic_dataset(spec.data_dir)
        else:
            X, Y = logistic_generate(LogisticGenConfig(p=p, n=spec.n, seed=spec.data_seed))
        return _LogisticSetup(X, Y, spec.lam)

    def _sample_logistic(self, config: ExperimentConfig, seed: int) -> SampleSet:
        assert config.logistic is not None
        setup = self._logistic_setup(config.logistic, config.p)
        model: TargetModel = setup.model
        cert = setup.cert
        transforms = ["precondition"]

        if config.transform is not None:
            model, cert, budget, _ = setup.convexified(
                config.eps, config.transform.R, config.transform.gamma
            )
            plan = plan_convexified(setup.p, cert.m, cert.M, config.eps, approximation_tv=budget)
            transforms.append("convexify")
        else:
            plan = self._plan_for_kind(config.algo, setup.p, cert, config.eps)

        run = RunConfig(
            n_chains=config.n_chains,
            seed=seed,
            record_trajectory=config.record_trajectory,
            algo=_UPDATE_RULES[config.algo],
        )
        samples = self._ensemble(model, plan, setup.theta_star, cert.M, run)
        samples.meta.transforms.extend(transforms)
        return map_back(samples, setup.preconditioner)

    # table1 ---------------------------------------------------------------------------------

    def table1(
        self,
        p_list: Iterable[int],
        eps: float,
        a_norm_sq: float = 0.5,
        output: Optional[Path] = None,
    ) -> List[Table1Row]:
        """LMC and LMCO plans on the mixture for every dimension in ``p_list``."""

        rows: List[Table1Row] = []
        for p in p_list:
            cert = mixture_certificate(mixture_vector(p, a_norm_sq))
            assert cert.L_f is not None
            for plan in (
                plan_lmc(p, cert.m, cert.M, eps),
                plan_lmco(p, cert.m, cert.M, cert.L_f, eps),
            ):
                reference = (
                    REPORTED_LMC_ITERATIONS.get(p)
                    if plan.algo.value == "LMC" and a_norm_sq == 0.5 and eps == 0.1
                    else None
                )
                rows.append(
                    Table1Row(
                        p=p,
                        algo=plan.algo.value,
                        K=plan.K,
                        T=plan.T,
                        h=plan.h,
                        predicted_tv=plan.predicted_tv or 0.0,
                        reported_K=reference,
                    )
                )
        if output is not None:
            pd.DataFrame([row.model_dump() for row in rows]).to_csv(output, index=False)
            logger.info(f"Wrote {len(rows)} plan rows to {output}")
        return rows

    # logistic-kk ----------------------------------------------------------------------------

    def logistic_kk(
        self, p: int, n: int, eps: float, trials: int, seed: int
    ) -> LogisticKKReport:
        """K of plain LMC against K′ of LMC on the convexified posterior, per dataset."""

        base_seed = self._settings.resolve_seed(seed)
        results: List[LogisticTrial] = []
        for trial in range(trials):
            data_seed = base_seed + trial
            X, Y = logistic_generate(LogisticGenConfig(p=p, n=n, seed=data_seed))
            setup = _LogisticSetup(X, Y, None)
            K = plan_lmc(p, setup.cert.m, setup.cert.M, eps).K
            _, cert, budget, radius = setup.convexified(eps)
            K_prime = plan_convexified(p, cert.m, cert.M, eps, approximation_tv=budget).K
            logger.debug(f"Trial {trial}: K={K}, K'={K_prime}, R={radius.R:.4g}")
            results.append(
                LogisticTrial(
                    trial=trial,
                    seed=data_seed,
                    K=K,
                    K_prime=K_prime,
                    R=radius.R,
                    barm=radius.barm,
                    gamma=radius.gamma,
                )
            )
        return LogisticKKReport(
            p=p,
            n=n,
            eps=eps,
            trials=results,
            mean_K=float(np.mean([trial.K for trial in results])),
            mean_K_prime=float(np.mean([trial.K_prime for trial in results])),
        )

    # lmco2-compare --------------------------------------------------------------------------

    def lmco2_compare(
        self,
        p: int,
        n: int,
        eps: float,
        n_chains: int,
        seed: int,
        lmc_plan: Literal["shared", "certified"] = "shared",
    ) -> ComparisonReport:
        """Sample the logistic posterior with LMC and LMCO′ and compare marginal summaries."""

        resolved = self._settings.resolve_seed(seed)
        X, Y = logistic_generate(LogisticGenConfig(p=p, n=n, seed=resolved))
        setup = _LogisticSetup(X, Y, None)
        assert setup.cert.L_f is not None
        grid = plan_lmco(p, setup.cert.m, setup.cert.M, setup.cert.L_f, eps)
        plan_for_lmc = (
            grid if lmc_plan == "shared" else plan_lmc(p, setup.cert.m, setup.cert.M, eps)
        )

        def draw(plan: SamplerPlan, rule: UpdateRule) -> SampleSet:
            config = RunConfig(n_chains=n_chains, seed=resolved, algo=rule)
            samples = self._ensemble(setup.model, plan, setup.theta_star, setup.cert.M, config)
            return map_back(samples, setup.preconditioner)

        lmc = draw(plan_for_lmc, UpdateRule.LMC)
        lmco2 = draw(grid, UpdateRule.LMCO2)
        distances = marginal_distances(lmc, lmco2)
        return ComparisonReport(
            p=p,
            n=n,
            eps=eps,
            n_chains=n_chains,
            lmc_plan=lmc_plan,
            K_lmc=plan_for_lmc.K,
            K_lmco2=grid.K,
            **distances.model_dump(),
        )

    # diagnose -------------------------------------------------------------------------------

    def diagnose(
        self,
        samples_path: Path,
        *,
        reference_path: Optional[Path] = None,
        target: Optional[TargetKind] = None,
        a_norm_sq: float = 0.5,
        eps: Optional[float] = None,
        direction: Optional[np.ndarray] = None,
        distance_threshold: Optional[float] = None,
        check_moments: bool = False,
    ) -> DiagnosticReport:
        """Compare a sample file with a reference file or with the analytic mixture law."""

        samples = read_samples(samples_path)
        eps = self._settings.planner.default_eps if eps is None else eps
        report = DiagnosticReport(samples=str(samples_path), distance_threshold=distance_threshold)

        if reference_path is not None:
            reference = read_samples(reference_path)
            report.distances = marginal_distances(samples, reference)
            v = _unit(direction, samples.dim)
            report.ks = KSReport(
                distance=ks_two_sample(project(samples, v), project(reference, v)),
                threshold=None,
                n=samples.n,
            )
            report.notes["reference"] = str(reference_path)
        elif target in (TargetKind.MIXTURE, TargetKind.DIRECT_MIXTURE):
            a = mixture_vector(samples.dim, a_norm_sq)
            a_norm = math.sqrt(a_norm_sq)
            v = a / a_norm if direction is None else _unit(direction, samples.dim)
            report.ks = ks_report(project(samples, v), mixture_projection_cdf(a_norm), eps)
            if check_moments:
                covariance = np.eye(samples.dim) + np.outer(a, a)
                report.moments = moment_check(samples, np.zeros(samples.dim), covariance)
            report.notes["target"] = target.value
        else:
            raise ConfigError("diagnose needs either a reference file or the mixture target")

        logger.info(f"Diagnostics for {samples_path}: passed={report.passed}")
        return report


def _unit(direction: Optional[np.ndarray], dim: int) -> np.ndarray:
    if direction is None:
        v = np.zeros(dim)
        v[0] = 1.0
        return v
    v = np.asarray(direction, dtype=float)
    return v / np.linalg.norm(v)

