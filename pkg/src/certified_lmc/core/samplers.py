"""Langevin updates (LMC, LMCO, LMCO′) and seeded chain/ensemble execution.

Chains advance in fixed-size chunks: one chunk moves all of its chains per
step through the row-batched model evaluators. Every chain owns its own
generator, so the draws of chain i depend only on (seed, i), never on the
chunk layout or the number of worker threads.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from tqdm import tqdm

from certified_lmc.core.errors import (
    CapabilityError,
    ChainDivergenceError,
    DomainError,
    EnsembleError,
    MatrixDomainError,
)
from certified_lmc.core.logging import get_logger
from certified_lmc.core.model import TargetModel
from certified_lmc.models.plans import AlgorithmTag, SamplerPlan
from certified_lmc.models.samples import RunConfig, SampleMeta, SampleSet, UpdateRule

logger = get_logger(__name__)

InitRule = Callable[[np.random.Generator], np.ndarray]
RowUpdate = Callable[[TargetModel, np.ndarray, float, np.ndarray], np.ndarray]

SERIES_THRESHOLD = 1e-4
NOISE_BLOCK = 256
_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(value: int) -> int:
    """SplitMix64 finaliser: a bijective 64-bit avalanche."""
    z = value & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_chain_seed(seed: int, chain_index: int) -> int:
    """Seed of chain i: the i-th output of a SplitMix64 stream started at ``seed``."""
    return splitmix64((seed & _MASK64) + (chain_index + 1) * _GOLDEN_GAMMA)


def chain_generator(seed: int, chain_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_chain_seed(seed, chain_index)))


def init_gaussian(theta_star: np.ndarray, M: float, rng: np.random.Generator) -> np.ndarray:
    """Draw from N(θ*, M⁻¹I)."""
    if M <= 0:
        raise DomainError(f"initial precision must be positive, got {M}")
    theta_star = np.asarray(theta_star, dtype=float)
    return theta_star + rng.standard_normal(theta_star.shape[0]) / np.sqrt(M)


def gaussian_init(theta_star: np.ndarray, M: float) -> InitRule:
    theta_star = np.asarray(theta_star, dtype=float)
    return lambda rng: init_gaussian(theta_star, M, rng)


def fixed_init(x0: np.ndarray) -> InitRule:
    x0 = np.asarray(x0, dtype=float)
    return lambda rng: x0.copy()


def _phi_coefficients(eigvals: np.ndarray, step: float) -> np.ndarray:
    """(1 − e^{−step·λ})/λ, with a Taylor series where step·λ is tiny."""
    z = step * eigvals
    small = np.abs(z) < SERIES_THRESHOLD
    safe = np.where(small, 1.0, eigvals)
    exact = -np.expm1(-z) / safe
    series = step * (1.0 - z / 2.0 + z * z / 6.0)
    return np.where(small, series, exact)


class OzakiOperators(BaseModel):
    """Spectral form of M = (I − e^{−hH})H⁻¹ and Σ = (I − e^{−2hH})H⁻¹.

    Arrays may carry leading batch dimensions, one operator per chain.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    eigvals: np.ndarray
    eigvecs: np.ndarray
    m_coeffs: np.ndarray
    s_coeffs: np.ndarray

    def _spectral(self, coeffs: np.ndarray, v: np.ndarray) -> np.ndarray:
        rotated = np.einsum("...ji,...j->...i", self.eigvecs, v)
        return np.einsum("...ij,...j->...i", self.eigvecs, coeffs * rotated)

    def apply_drift(self, gradient: np.ndarray) -> np.ndarray:
        return self._spectral(self.m_coeffs, gradient)

    def apply_noise_sqrt(self, noise: np.ndarray) -> np.ndarray:
        return self._spectral(np.sqrt(self.s_coeffs), noise)

    def _matrix(self, coeffs: np.ndarray) -> np.ndarray:
        scaled = self.eigvecs * coeffs[..., None, :]
        return np.einsum("...ik,...jk->...ij", scaled, self.eigvecs)

    def mean_operator(self) -> np.ndarray:
        return self._matrix(self.m_coeffs)

    def covariance(self) -> np.ndarray:
        return self._matrix(self.s_coeffs)


def ozaki_operators_from_spectrum(
    eigvals: np.ndarray, eigvecs: np.ndarray, h: float
) -> OzakiOperators:
    if h <= 0:
        raise DomainError(f"step size must be positive, got {h}")
    eigvals = np.asarray(eigvals, dtype=float)
    if not np.all(np.isfinite(eigvals)):
        raise MatrixDomainError("Hessian has non-finite eigenvalues")
    if np.any(eigvals <= 0.0):
        raise MatrixDomainError(
            f"Hessian must be positive definite, smallest eigenvalue {float(np.min(eigvals)):.3e}"
        )
    return OzakiOperators(
        eigvals=eigvals,
        eigvecs=np.asarray(eigvecs, dtype=float),
        m_coeffs=_phi_coefficients(eigvals, h),
        s_coeffs=_phi_coefficients(eigvals, 2.0 * h),
    )


def ozaki_operators(H: np.ndarray, h: float) -> OzakiOperators:
    """Operators for one (p, p) Hessian or a stack of them."""
    H = np.asarray(H, dtype=float)
    try:
        eigvals, eigvecs = np.linalg.eigh(0.5 * (H + np.swapaxes(H, -1, -2)))
    except np.linalg.LinAlgError as exc:
        raise MatrixDomainError(f"eigendecomposition failed: {exc}") from exc
    return ozaki_operators_from_spectrum(eigvals, eigvecs, h)


def _lmc_rows(model: TargetModel, xs: np.ndarray, h: float, noise: np.ndarray) -> np.ndarray:
    return xs - h * model.gradient_rows(xs) + np.sqrt(2.0 * h) * noise


def _lmco_rows(model: TargetModel, xs: np.ndarray, h: float, noise: np.ndarray) -> np.ndarray:
    spectrum = model.structured_hessian_rows(xs)
    if spectrum is not None:
        ops = ozaki_operators_from_spectrum(spectrum[0], spectrum[1], h)
    else:
        ops = ozaki_operators(model.hessian_rows(xs), h)
    return xs - ops.apply_drift(model.gradient_rows(xs)) + ops.apply_noise_sqrt(noise)


def _lmco2_rows(model: TargetModel, xs: np.ndarray, h: float, noise: np.ndarray) -> np.ndarray:
    # (I − ½hH) applied once to h∇f − √(2h)ξ
    w = h * model.gradient_rows(xs) - np.sqrt(2.0 * h) * noise
    return xs - (w - 0.5 * h * model.hvp_rows(xs, w))


_ROW_UPDATES: Dict[UpdateRule, RowUpdate] = {
    UpdateRule.LMC: _lmc_rows,
    UpdateRule.LMCO: _lmco_rows,
    UpdateRule.LMCO2: _lmco2_rows,
}


def _single_step(
    update: UpdateRule,
    model: TargetModel,
    x: np.ndarray,
    h: float,
    rng: Optional[np.random.Generator],
    noise: Optional[np.ndarray],
) -> np.ndarray:
    if h <= 0:
        raise DomainError(f"step size must be positive, got {h}")
    _require_capability(model, update)
    x = np.asarray(x, dtype=float)
    if noise is None:
        if rng is None:
            raise DomainError("either a generator or an explicit noise vector is required")
        noise = rng.standard_normal(x.shape[0])
    result = _ROW_UPDATES[update](model, x[None, :], h, np.asarray(noise, dtype=float)[None, :])[0]
    if not np.all(np.isfinite(result)):
        raise ChainDivergenceError(
            f"{update.value} step on '{model.tag}' produced a non-finite state",
            chain_index=0,
            step=1,
        )
    return result


def lmc_step(
    model: TargetModel,
    x: np.ndarray,
    h: float,
    rng: Optional[np.random.Generator] = None,
    noise: Optional[np.ndarray] = None,
) -> np.ndarray:
    """x − h∇f(x) + √(2h)ξ."""
    return _single_step(UpdateRule.LMC, model, x, h, rng, noise)


def lmco_step(
    model: TargetModel,
    x: np.ndarray,
    h: float,
    rng: Optional[np.random.Generator] = None,
    noise: Optional[np.ndarray] = None,
) -> np.ndarray:
    """x − M∇f(x) + Σ^{1/2}ξ with M, Σ built from ∇²f(x)."""
    return _single_step(UpdateRule.LMCO, model, x, h, rng, noise)


def lmco2_step(
    model: TargetModel,
    x: np.ndarray,
    h: float,
    rng: Optional[np.random.Generator] = None,
    noise: Optional[np.ndarray] = None,
) -> np.ndarray:
    """x − h(I − ½hH)∇f(x) + √(2h)(I − ½hH)ξ, using Hessian-vector products only."""
    return _single_step(UpdateRule.LMCO2, model, x, h, rng, noise)


def _require_capability(model: TargetModel, update: UpdateRule) -> None:
    if update is not UpdateRule.LMC and not model.supports_ozaki:
        raise CapabilityError(
            f"{update.value} needs Hessian-based updates, which '{model.tag}' does not allow"
        )


def resolve_update(plan: SamplerPlan, config: Optional[RunConfig] = None) -> UpdateRule:
    """Explicit rule from the config, otherwise the one the plan was certified for."""
    if config is not None and config.algo is not None:
        return config.algo
    return UpdateRule.LMCO if plan.algo is AlgorithmTag.LMCO else UpdateRule.LMC


class ChainResult(BaseModel):
    """Final state of one chain and, optionally, its full path."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    x: np.ndarray
    trajectory: Optional[np.ndarray] = None


class _NoiseStreams:
    """Per-chain standard normals, drawn in blocks of steps from each chain's generator."""

    def __init__(self, generators: Sequence[np.random.Generator], dim: int, steps: int) -> None:
        self.generators = generators
        self.dim = dim
        self.remaining = steps
        self.block = np.empty((0, len(generators), dim))
        self.cursor = 0

    def next(self) -> np.ndarray:
        if self.cursor == self.block.shape[0]:
            size = min(NOISE_BLOCK, self.remaining)
            self.block = np.stack(
                [rng.standard_normal((size, self.dim)) for rng in self.generators], axis=1
            )
            self.remaining -= size
            self.cursor = 0
        noise = self.block[self.cursor]
        self.cursor += 1
        return noise


def _advance_chunk(
    model: TargetModel,
    update: UpdateRule,
    plan: SamplerPlan,
    x0s: np.ndarray,
    generators: Sequence[np.random.Generator],
    first_index: int,
    record_trajectory: bool,
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Advance a block of chains; rows that leave the finite range are frozen and reported.

    Every generator is consumed at the same pace whether or not its chain is
    still alive, so the set of failing chains does not depend on the block.
    """

    step_rows = _ROW_UPDATES[update]
    xs = np.array(x0s, dtype=float)
    path = np.empty((xs.shape[0], plan.K + 1, model.dim)) if record_trajectory else None
    if path is not None:
        path[:, 0] = xs
    streams = _NoiseStreams(generators, model.dim, plan.K)
    alive = np.ones(xs.shape[0], dtype=bool)
    failures: Dict[int, Exception] = {}
    for k in range(plan.K):
        noise = streams.next()
        if not alive.any():
            continue
        xs[alive] = step_rows(model, xs[alive], plan.h, noise[alive])
        diverged = alive & ~np.all(np.isfinite(xs), axis=1)
        for row in np.flatnonzero(diverged):
            chain = first_index + int(row)
            failures[chain] = ChainDivergenceError(
                f"chain {chain} on '{model.tag}' diverged at step {k + 1}",
                chain_index=chain,
                step=k + 1,
            )
        alive &= ~diverged
        if path is not None:
            path[:, k + 1] = xs
    if failures:
        raise EnsembleError(failures)
    return xs, path


def run_chain(
    model: TargetModel,
    plan: SamplerPlan,
    x0: np.ndarray,
    seed: int,
    algo: Optional[UpdateRule] = None,
    record_trajectory: bool = False,
) -> ChainResult:
    """Apply K steps of the update from ``x0`` with a generator seeded by ``seed``."""

    update = algo or resolve_update(plan)
    _require_capability(model, update)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (model.dim,):
        raise DomainError(f"initial point has shape {x0.shape}, expected ({model.dim},)")
    rng = np.random.Generator(np.random.PCG64(seed & _MASK64))
    try:
        xs, path = _advance_chunk(model, update, plan, x0[None, :], [rng], 0, record_trajectory)
    except EnsembleError as exc:
        raise exc.failures[0] from None
    return ChainResult(x=xs[0], trajectory=None if path is None else path[0])


def _chunk_bounds(n_chains: int, chunk_size: int) -> List[Tuple[int, int]]:
    return [(start, min(start + chunk_size, n_chains)) for start in range(0, n_chains, chunk_size)]


def run_ensemble(
    model: TargetModel,
    plan: SamplerPlan,
    init: InitRule,
    config: RunConfig,
    *,
    threads: int = 1,
    chunk_size: int = 64,
    progress: bool = False,
) -> SampleSet:
    """Run ``config.n_chains`` independent chains and collect their final states.

    Chain i draws its initial point and then its step noise from the
    generator derived from (config.seed, i). Failures are gathered per chain
    and raised together once every chunk has finished.
    """

    if threads < 1 or chunk_size < 1:
        raise DomainError("threads and chunk_size must be at least 1")
    update = resolve_update(plan, config)
    _require_capability(model, update)

    bounds = _chunk_bounds(config.n_chains, chunk_size)
    logger.info(
        f"Running {config.n_chains} {update.value} chains on '{model.tag}' "
        f"(K={plan.K}, h={plan.h:.4g}) in {len(bounds)} chunks on {threads} threads"
    )
    started = time.perf_counter()

    def work(span: Tuple[int, int]) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        generators = [chain_generator(config.seed, i) for i in range(*span)]
        x0s = np.stack([np.asarray(init(rng), dtype=float) for rng in generators])
        return _advance_chunk(
            model, update, plan, x0s, generators, span[0], config.record_trajectory
        )

    failures: Dict[int, Exception] = {}
    outcomes: Dict[int, Tuple[np.ndarray, Optional[np.ndarray]]] = {}
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(work, span) for span in bounds]
        for position, future in enumerate(
            tqdm(futures, desc="chunks", unit="chunk", disable=not progress)
        ):
            try:
                outcomes[position] = future.result()
            except EnsembleError as exc:
                failures.update(exc.failures)
            except Exception as exc:  # noqa: BLE001
                # evaluation errors are not attributable to a single row
                failures.update((chain, exc) for chain in range(*bounds[position]))

    if failures:
        logger.error(f"{len(failures)} chain(s) failed; first failing chain {min(failures)}")
        raise EnsembleError(failures)

    data = np.vstack([outcomes[i][0] for i in range(len(bounds))])
    trajectories = (
        np.concatenate([outcomes[i][1] for i in range(len(bounds))])  # type: ignore[misc]
        if config.record_trajectory
        else None
    )
    wall_time = time.perf_counter() - started
    logger.info(f"Finished {config.n_chains} chains in {wall_time:.2f}s")
    meta = SampleMeta(
        seed=config.seed,
        target=model.tag,
        n_chains=config.n_chains,
        algo=update.value,
        plan=plan,
        wall_time_s=wall_time,
        empirical_only=update is UpdateRule.LMCO2,
        config=config.model_dump(mode="json"),
    )
    return SampleSet(data=data, meta=meta, trajectories=trajectories)
