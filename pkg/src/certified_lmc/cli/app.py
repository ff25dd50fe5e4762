"""Typer application exposing the command-line interface."""

from __future__ import annotations

from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Iterator, List, Optional

import numpy as np
import typer
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from certified_lmc.adapters.csv import read_samples
from certified_lmc.core.config import AppSettings, load_settings
from certified_lmc.core.diagnostics import histogram_table, project
from certified_lmc.core.errors import (
    ChainDivergenceError,
    ConfigError,
    DomainError,
    EnsembleError,
    MatrixDomainError,
)
from certified_lmc.core.logging import configure_logging, get_logger
from certified_lmc.core.planner import plan_for
from certified_lmc.core.services.experiments import ExperimentService
from certified_lmc.models.experiments import ExperimentConfig, TargetKind
from certified_lmc.models.plans import AlgorithmTag, WarmStartSpec
from certified_lmc.targets.mixture import mixture_projection_pdf, mixture_vector
from certified_lmc.utils.io import read_json, write_json

app = typer.Typer(help="Certified Langevin Monte Carlo planning, sampling and diagnostics.")
logger = get_logger(__name__)
console = Console()
error_console = Console(stderr=True)

EXIT_DIAGNOSTIC_FAILED = 1
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_DIVERGED = 4


class PlanAlgorithm(str, Enum):
    """Planner families accepted by ``plan``."""

    LMC = "lmc"
    LMC_WARM = "lmc-warm"
    LMC_CONVEXIFIED = "lmc-convexified"
    LMCO = "lmco"


_PLAN_TAGS = {
    PlanAlgorithm.LMC: AlgorithmTag.LMC,
    PlanAlgorithm.LMC_WARM: AlgorithmTag.LMC_WARM,
    PlanAlgorithm.LMC_CONVEXIFIED: AlgorithmTag.LMC_CONVEXIFIED,
    PlanAlgorithm.LMCO: AlgorithmTag.LMCO,
}


class LMCPlanChoice(str, Enum):
    SHARED = "shared"
    CERTIFIED = "certified"


def _resolve_settings(ctx: typer.Context) -> AppSettings:
    settings: Optional[AppSettings] = ctx.obj
    if settings is None:
        settings = load_settings()
        ctx.obj = settings
    return settings


def _service(ctx: typer.Context, threads: Optional[int] = None) -> ExperimentService:
    settings = _resolve_settings(ctx)
    if threads is not None:
        sampling = settings.sampling.model_copy(update={"threads": threads})
        settings = settings.model_copy(update={"sampling": sampling})
    return ExperimentService(settings=settings)


@contextmanager
def _exit_codes() -> Iterator[None]:
    """Translate domain failures into the documented exit codes."""
    try:
        yield
    except (ChainDivergenceError, EnsembleError) as exc:
        chain = exc.chain_index if isinstance(exc, ChainDivergenceError) else exc.first_chain
        error_console.print(f"[red]Chain {chain} diverged:[/red] {exc}")
        raise typer.Exit(EXIT_DIVERGED) from exc
    except (ConfigError, ValidationError, FileNotFoundError) as exc:
        error_console.print(f"[red]Invalid input:[/red] {exc}")
        raise typer.Exit(EXIT_USAGE) from exc
    except (DomainError, MatrixDomainError) as exc:
        error_console.print(f"[red]Infeasible:[/red] {exc}")
        raise typer.Exit(EXIT_INFEASIBLE) from exc
    except ValueError as exc:
        error_console.print(f"[red]Invalid input:[/red] {exc}")
        raise typer.Exit(EXIT_USAGE) from exc


def _parse_int_list(raw: str) -> List[int]:
    try:
        return [int(item) for item in raw.split(",") if item.strip()]
    except ValueError as exc:
        raise typer.BadParameter(f"expected comma separated integers, got {raw!r}") from exc


@app.callback(invoke_without_command=True)
def main(
    ctx: typer.Context,
    config: str = typer.Option(None, help="Path to a configuration file."),
    debug: bool = typer.Option(False, help="Enable verbose logging."),
) -> None:
    """Root CLI callback responsible for wiring global options."""
    try:
        settings = load_settings(config)
    except ValidationError as exc:
        error_console.print(f"[red]Invalid configuration:[/red] {exc}")
        raise typer.Exit(EXIT_USAGE) from exc
    configure_logging(debug, settings.app.log_level)
    ctx.obj = settings


@app.command()
def plan(
    ctx: typer.Context,
    algo: PlanAlgorithm = typer.Option(..., "--algo", case_sensitive=False),
    p: int = typer.Option(..., "--p", min=1, help="Dimension."),
    strong_convexity: float = typer.Option(..., "--m", help="Strong convexity constant m."),
    smoothness: float = typer.Option(..., "--M", help="Gradient Lipschitz constant M."),
    eps: Optional[float] = typer.Option(None, "--eps", help="Target TV precision."),
    lipschitz_hessian: Optional[float] = typer.Option(
        None, "--Lf", help="Hessian Lipschitz constant (lmco)."
    ),
    chi2: Optional[float] = typer.Option(None, "--chi2", help="χ² divergence bound (lmc-warm)."),
    mu2: Optional[float] = typer.Option(None, "--mu2", help="Second moment scale (lmc-warm)."),
    approximation_tv: Optional[float] = typer.Option(
        None, "--approximation-tv", help="TV cost of convexification (lmc-convexified)."
    ),
) -> None:
    """Print the certified (T, h, K) plan as JSON."""
    settings = _resolve_settings(ctx)
    eps = settings.planner.default_eps if eps is None else eps
    if algo is PlanAlgorithm.LMCO and lipschitz_hessian is None:
        raise typer.BadParameter("--Lf is required for lmco", param_hint="--Lf")
    if algo is PlanAlgorithm.LMC_WARM and (chi2 is None or mu2 is None):
        raise typer.BadParameter("--chi2 and --mu2 are required for lmc-warm")

    with _exit_codes():
        warm = None
        if algo is PlanAlgorithm.LMC_WARM:
            warm = WarmStartSpec(chi2_bound=chi2, mu2=mu2)
        result = plan_for(
            _PLAN_TAGS[algo],
            p=p,
            m=strong_convexity,
            M=smoothness,
            eps=eps,
            L_f=lipschitz_hessian,
            warm=warm,
            approximation_tv=approximation_tv,
        )
    typer.echo(result.model_dump_json(indent=2))


@app.command()
def sample(
    ctx: typer.Context,
    experiment: Path = typer.Argument(..., help="JSON experiment document."),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override the document's seed."),
    threads: Optional[int] = typer.Option(None, "--threads", min=1, help="Worker threads."),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Sample CSV path."),
) -> None:
    """Draw samples described by an experiment document and write CSV plus JSON sidecar."""
    with _exit_codes():
        document = read_json(experiment)
        if "output" not in document:
            output_directory = Path(_resolve_settings(ctx).data.output_directory)
            document["output"] = str(output_directory / "samples.csv")
        if seed is not None:
            document["seed"] = seed
        if output is not None:
            document["output"] = str(output)
        config = ExperimentConfig.model_validate(document)
        samples, path = _service(ctx, threads).sample(config)
    console.print(f"Wrote {samples.n} x {samples.dim} samples to {path}")


@app.command()
def table1(
    ctx: typer.Context,
    p_list: str = typer.Option("8,12,16,20,30,40,60", "--p-list", help="Dimensions."),
    eps: Optional[float] = typer.Option(None, "--eps"),
    a_norm_sq: float = typer.Option(0.5, "--a-norm-sq", help="Squared norm of the mean."),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="CSV destination."),
) -> None:
    """Plan LMC and LMCO on the Gaussian mixture for several dimensions."""
    service = _service(ctx)
    eps = service.settings.planner.default_eps if eps is None else eps
    with _exit_codes():
        rows = service.table1(_parse_int_list(p_list), eps, a_norm_sq, output)

    table = Table(title=f"Iterations for ε = {eps}")
    for column in ("p", "algo", "K", "T", "h", "reference K"):
        table.add_column(column, justify="right")
    for row in rows:
        table.add_row(
            str(row.p),
            row.algo,
            f"{row.K:,}",
            f"{row.T:.4g}",
            f"{row.h:.4g}",
            f"{row.reported_K:,}" if row.reported_K else "",
        )
    console.print(table)


@app.command("logistic-kk")
def logistic_kk(
    ctx: typer.Context,
    p: int = typer.Option(2, "--p", min=1),
    n: int = typer.Option(1000, "--n", min=1),
    eps: Optional[float] = typer.Option(None, "--eps"),
    trials: int = typer.Option(10, "--trials", min=1),
    seed: int = typer.Option(0, "--seed"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="JSON report path."),
) -> None:
    """Compare LMC iterations with and without convexification on logistic regression."""
    service = _service(ctx)
    eps = service.settings.planner.default_eps if eps is None else eps
    with _exit_codes():
        report = service.logistic_kk(p, n, eps, trials, seed)

    table = Table(title=f"Logistic regression, p = {p}, n = {n}, ε = {eps}")
    for column in ("trial", "K", "K'", "R", "m̄", "γ"):
        table.add_column(column, justify="right")
    for trial in report.trials:
        table.add_row(
            str(trial.trial),
            f"{trial.K:,}",
            f"{trial.K_prime:,}",
            f"{trial.R:.4g}",
            f"{trial.barm:.4g}",
            f"{trial.gamma:.4g}",
        )
    console.print(table)
    console.print(f"mean K = {report.mean_K:,.0f}, mean K' = {report.mean_K_prime:,.0f}")
    if output is not None:
        write_json(report.model_dump(mode="json"), output)


@app.command()
def diagnose(
    ctx: typer.Context,
    samples: Path = typer.Option(..., "--samples", help="Sample CSV to check."),
    reference: Optional[Path] = typer.Option(None, "--reference", help="Reference sample CSV."),
    target: Optional[TargetKind] = typer.Option(None, "--target", help="Analytic target."),
    a_norm_sq: float = typer.Option(0.5, "--a-norm-sq"),
    eps: Optional[float] = typer.Option(None, "--eps", help="Precision entering the KS threshold."),
    distance_threshold: Optional[float] = typer.Option(None, "--distance-threshold"),
    check_moments: bool = typer.Option(False, "--check-moments"),
    histogram: Optional[Path] = typer.Option(None, "--histogram", help="Histogram CSV path."),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="JSON report path."),
) -> None:
    """Run KS, moment and marginal-distance checks; exit 1 when a check fails."""
    service = _service(ctx)
    with _exit_codes():
        try:
            report = service.diagnose(
                samples,
                reference_path=reference,
                target=target,
                a_norm_sq=a_norm_sq,
                eps=eps,
                distance_threshold=distance_threshold,
                check_moments=check_moments,
            )
        except ValueError as exc:
            raise ConfigError(f"could not read {samples}: {exc}") from exc
        if histogram is not None and target is not None:
            data = read_samples(samples)
            a = mixture_vector(data.dim, a_norm_sq)
            a_norm = float(np.linalg.norm(a))
            frame = histogram_table(project(data, a / a_norm), mixture_projection_pdf(a_norm))
            frame.to_csv(histogram, index=False)

    typer.echo(report.model_dump_json(indent=2))
    if output is not None:
        write_json(report.model_dump(mode="json"), output)
    if not report.passed:
        raise typer.Exit(EXIT_DIAGNOSTIC_FAILED)


@app.command("lmco2-compare")
def lmco2_compare(
    ctx: typer.Context,
    p: int = typer.Option(2, "--p", min=1),
    n: int = typer.Option(200, "--n", min=1),
    eps: Optional[float] = typer.Option(None, "--eps"),
    n_chains: int = typer.Option(100, "--n-chains", min=1),
    seed: int = typer.Option(0, "--seed"),
    threads: Optional[int] = typer.Option(None, "--threads", min=1),
    lmc_plan: LMCPlanChoice = typer.Option(LMCPlanChoice.SHARED, "--lmc-plan"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="JSON report path."),
) -> None:
    """Compare LMC and LMCO′ marginal summaries on a generated logistic posterior."""
    service = _service(ctx, threads)
    eps = service.settings.planner.default_eps if eps is None else eps
    with _exit_codes():
        report = service.lmco2_compare(p, n, eps, n_chains, seed, lmc_plan.value)
    typer.echo(report.model_dump_json(indent=2))
    if output is not None:
        write_json(report.model_dump(mode="json"), output)
