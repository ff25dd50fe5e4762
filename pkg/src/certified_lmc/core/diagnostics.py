"""Statistical checks of sampler output against analytic laws and other sample sets."""

from __future__ import annotations

import math
from typing import Callable, Union

import numpy as np
import pandas as pd
from scipy import stats

from certified_lmc.core.errors import DomainError
from certified_lmc.core.logging import get_logger
from certified_lmc.models.reports import (
    EnergyBoundReport,
    KSReport,
    MarginalSummaryDistances,
    MomentReport,
)
from certified_lmc.models.samples import SampleSet

logger = get_logger(__name__)

CDF = Callable[[np.ndarray], np.ndarray]
SampleLike = Union[SampleSet, np.ndarray]


def _data(samples: SampleLike) -> np.ndarray:
    return samples.data if isinstance(samples, SampleSet) else np.atleast_2d(samples)


def project(samples: SampleLike, v: np.ndarray) -> np.ndarray:
    """vᵀx for every draw; v must be a unit vector."""
    v = np.asarray(v, dtype=float)
    if abs(float(np.linalg.norm(v)) - 1.0) > 1e-10:
        raise DomainError("projection direction must have unit norm")
    data = _data(samples)
    if data.shape[1] != v.shape[0]:
        raise DomainError(f"direction has dimension {v.shape[0]}, samples have {data.shape[1]}")
    return data @ v


def ks_distance(sample: np.ndarray, cdf: CDF) -> float:
    """sup |F_N − F| of a one-dimensional sample against an analytic CDF."""
    sample = np.asarray(sample, dtype=float).ravel()
    if sample.size == 0:
        raise DomainError("KS distance needs at least one draw")
    return float(stats.kstest(sample, cdf).statistic)


def ks_two_sample(first: np.ndarray, second: np.ndarray) -> float:
    """sup |F_N − G_M| between two one-dimensional samples."""
    return float(stats.ks_2samp(np.ravel(first), np.ravel(second)).statistic)


def dkw_slack(n: int, delta: float = 0.05) -> float:
    """√(ln(2/δ)/(2n)): with probability 1 − δ the empirical CDF is this close to F."""
    if n < 1 or not 0.0 < delta < 1.0:
        raise DomainError("DKW slack needs n >= 1 and delta in (0, 1)")
    return math.sqrt(math.log(2.0 / delta) / (2.0 * n))


def ks_report(sample: np.ndarray, cdf: CDF, eps: float, delta: float = 0.05) -> KSReport:
    """KS distance with the acceptance threshold ε + DKW slack."""
    sample = np.asarray(sample, dtype=float).ravel()
    return KSReport(
        distance=ks_distance(sample, cdf),
        threshold=eps + dkw_slack(sample.size, delta),
        n=sample.size,
    )


def marginal_distances(first: SampleLike, second: SampleLike) -> MarginalSummaryDistances:
    """(1/p)‖s(A) − s(B)‖₁ for the coordinate-wise mean, median and quartiles."""
    a, b = _data(first), _data(second)
    if a.shape[1] != b.shape[1]:
        raise DomainError(f"sample sets have dimensions {a.shape[1]} and {b.shape[1]}")

    def distance(summary_a: np.ndarray, summary_b: np.ndarray) -> float:
        return float(np.mean(np.abs(summary_a - summary_b)))

    qa = np.quantile(a, [0.25, 0.5, 0.75], axis=0, method="linear")
    qb = np.quantile(b, [0.25, 0.5, 0.75], axis=0, method="linear")
    return MarginalSummaryDistances(
        d_mean=distance(a.mean(axis=0), b.mean(axis=0)),
        d_median=distance(qa[1], qb[1]),
        d_Q1=distance(qa[0], qb[0]),
        d_Q3=distance(qa[2], qb[2]),
    )


def moment_check(
    samples: SampleLike,
    mean_true: np.ndarray,
    cov_true: np.ndarray,
    z_threshold: float = 4.0,
) -> MomentReport:
    """Flag coordinates whose mean or covariance entry is more than z standard errors off.

    Mean errors are scaled by √(Σ_ii/N); covariance errors by the empirical
    standard deviation of the centred products over √N.
    """

    data = _data(samples)
    n, p = data.shape
    if n < 30:
        raise DomainError(f"moment check needs at least 30 draws, got {n}")
    mean_true = np.asarray(mean_true, dtype=float)
    cov_true = np.atleast_2d(np.asarray(cov_true, dtype=float))
    if mean_true.shape != (p,) or cov_true.shape != (p, p):
        raise DomainError("reference moments do not match the sample dimension")

    mean = data.mean(axis=0)
    mean_z = np.abs(mean - mean_true) / np.sqrt(np.diag(cov_true) / n)
    centred = data - mean
    products = np.einsum("ni,nj->nij", centred, centred)
    cov = products.mean(axis=0)
    cov_se = products.std(axis=0) / math.sqrt(n)
    cov_z = np.abs(cov - cov_true) / np.where(cov_se > 0.0, cov_se, np.inf)

    flagged_means = [int(i) for i in np.flatnonzero(mean_z > z_threshold)]
    rows, cols = np.triu_indices(p)
    flagged_covariances = [
        [int(i), int(j)] for i, j in zip(rows, cols) if cov_z[i, j] > z_threshold
    ]
    worst = float(max(np.max(mean_z), np.max(cov_z[rows, cols])))
    if flagged_means or flagged_covariances:
        logger.info(
            f"Moment check flagged means {flagged_means} and covariances {flagged_covariances}"
        )
    return MomentReport(
        n=n,
        z_threshold=z_threshold,
        flagged_means=flagged_means,
        flagged_covariances=flagged_covariances,
        worst_z=worst,
    )


def energy_bound(m: float, M: float, p: int, init_msd: float) -> float:
    """(M/m)·E‖ϑ⁰ − θ*‖² + 2Mp/m²."""
    if m <= 0 or M <= 0:
        raise DomainError("energy bound needs m > 0 and M > 0")
    return (M / m) * init_msd + 2.0 * M * p / m**2


def energy_bound_check(
    samples: SampleLike,
    theta_star: np.ndarray,
    m: float,
    M: float,
    p: int,
    init_msd: float,
) -> EnergyBoundReport:
    """Mean of ‖ϑ − θ*‖² plus three standard errors must stay below the bound."""
    data = _data(samples)
    sq_dist = np.sum((data - np.asarray(theta_star, dtype=float)) ** 2, axis=1)
    bound = energy_bound(m, M, p, init_msd)
    mean = float(sq_dist.mean())
    se = float(sq_dist.std(ddof=1) / math.sqrt(sq_dist.size)) if sq_dist.size > 1 else 0.0
    margin = bound - (mean + 3.0 * se)
    return EnergyBoundReport(
        bound=bound, empirical_mean=mean, standard_error=se, margin=margin, passed=margin >= 0.0
    )


def histogram_table(values: np.ndarray, density: CDF, bins: int = 50) -> pd.DataFrame:
    """Counts per bin next to the analytic density at each bin midpoint."""
    counts, edges = np.histogram(np.asarray(values, dtype=float).ravel(), bins=bins)
    midpoints = 0.5 * (edges[:-1] + edges[1:])
    return pd.DataFrame(
        {
            "bin_left": edges[:-1],
            "bin_right": edges[1:],
            "count": counts,
            "analytic_density_at_midpoint": density(midpoints),
        }
    )
