import dataclasses
import functools
import logging
import math
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence

import numpy as np

import socdyn.config as config
import socdyn.exc as exc
from socdyn.gof import MomentEstimate
from socdyn.model import grad_log_density_star, log_density_star, PhiKind, stable_sum, StarDensity
from socdyn.report import PathLike, write_columns, write_json
from socdyn.util import chunk_ranges, map_chunks, NoiseBlocks, Purpose, StreamFactory

log = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class MalaConfig:
    """Parameters of Langevin chains targeting the equilibrium density.

    :param model: target density.
    :param chain_length: number of kept samples per chain.
    :param step_size: initial step size h. It defaults to 0.5σ²/n^{1/3}.
    :param burn_in: number of discarded steps per chain, during which the step size is tuned.
    :param thinning: number of steps between kept samples.
    :param seed: 64-bit seed of all random streams.
    :param adjusted: whether proposals are accepted by the Metropolis–Hastings rule (MALA) or always (ULA).
    :param chains: number of independent chains.
    :param tune: whether the step size of an adjusted chain is tuned during burn-in.
    """
    model: StarDensity
    chain_length: int
    step_size: Optional[float] = None
    burn_in: int = 1000
    thinning: int = 1
    seed: int = 0
    adjusted: bool = True
    chains: int = 1
    tune: bool = True

    def __post_init__(self):
        if self.chain_length < 1:
            raise exc.ContractError(f'Chain length must be positive, but it is {self.chain_length}.')
        if self.step_size is not None and not self.step_size > 0:
            raise exc.ContractError(f'Step size must be positive, but it is {self.step_size}.')
        if self.burn_in < 0:
            raise exc.ContractError(f'Burn-in must be nonnegative, but it is {self.burn_in}.')
        if self.thinning < 1:
            raise exc.ContractError(f'Thinning must be positive, but it is {self.thinning}.')
        if self.chains < 1:
            raise exc.ContractError(f'Number of chains must be positive, but it is {self.chains}.')

    @property
    def resolved_step_size(self) -> float:
        if self.step_size is not None:
            return self.step_size
        return 0.5 * self.model.phi.variance / self.model.n ** (1 / 3)

    @property
    def sweeps(self) -> int:
        return self.burn_in + self.chain_length * self.thinning


@dataclasses.dataclass(frozen=True)
class ChainDiagnostics:
    """Acceptance rate, summed effective sample size and sweeps per chain of a sampling run.

    Non-finite proposals are always rejected and counted in `nonfinite_proposals`, so the acceptance rate of
    unadjusted chains is 1 only when every proposal was finite.
    """
    acceptance_rate: float
    effective_sample_estimate: float
    sweep_count: int
    nonfinite_proposals: int = 0

    def to_json(self) -> dict:
        return {'acceptance_rate': self.acceptance_rate, 'ess': self.effective_sample_estimate,
                'sweeps': self.sweep_count}


@dataclasses.dataclass(frozen=True)
class EquilibriumSamples:
    """Kept values of S/n^{3/4}, chain after chain, and the diagnostics of the chains."""
    samples: np.ndarray
    diagnostics: ChainDiagnostics
    chains: int = 1

    def moment(self, order: int) -> MomentEstimate:
        """Return the sample mean of the power of the given order with a standard error from its per-chain ESS."""
        if order < 1:
            raise exc.ContractError(f'Moment order must be positive, but it is {order}.')
        powers = self.samples ** order
        ess = sum(effective_sample_size(row) for row in powers.reshape(self.chains, -1))
        return MomentEstimate(float(powers.mean()), float(powers.std() / math.sqrt(ess)))

    def to_csv(self, path: PathLike) -> None:
        write_columns(path, {'s_star_rescaled': self.samples})

    def diagnostics_to_json(self, path: PathLike) -> None:
        write_json(path, self.diagnostics.to_json())


class MalaStep(NamedTuple):
    x: np.ndarray
    accepted: np.ndarray
    log_ratio: np.ndarray
    finite: np.ndarray


class _Chains(NamedTuple):
    x: np.ndarray
    log_density: np.ndarray
    grad: np.ndarray


def _log_proposal(to: np.ndarray, start: np.ndarray, grad: np.ndarray, h: np.ndarray) -> np.ndarray:
    d = to - start - 0.5 * h[..., None] * grad
    return -stable_sum(d * d) / (2 * h)


def _advance(chains: _Chains, model: StarDensity, h: np.ndarray, noise: np.ndarray, uniform: Optional[np.ndarray],
             adjusted: bool):
    x, log_density, grad = chains
    y = x + 0.5 * h[..., None] * grad + np.sqrt(h)[..., None] * noise
    with np.errstate(invalid='ignore', over='ignore'):
        log_density_y = log_density_star(y, model)
        grad_y = grad_log_density_star(y, model)
        finite = np.all(np.isfinite(y), axis=-1) & np.isfinite(log_density_y) & np.all(np.isfinite(grad_y), axis=-1)
        log_ratio = (log_density_y - log_density + _log_proposal(x, y, grad_y, h) - _log_proposal(y, x, grad, h))
    log_ratio = np.where(finite, log_ratio, -np.inf)
    if adjusted:
        with np.errstate(divide='ignore'):
            accepted = finite & (np.log(uniform) < log_ratio)
    else:
        accepted = finite
    keep = accepted[..., None]
    new = _Chains(np.where(keep, y, x), np.where(accepted, log_density_y, log_density), np.where(keep, grad_y, grad))
    return new, accepted, log_ratio, finite


def mala_step(x: np.ndarray, config: MalaConfig, rng: Optional[np.random.Generator] = None, *,
              step_size: Optional[float] = None, noise: Optional[np.ndarray] = None,
              uniform: Optional[np.ndarray] = None) -> MalaStep:
    """Take one Langevin step from x, or from each row of a batch of configurations.

    The proposal is y = x + (h/2)∇log f*(x) + √h ξ. An adjusted step accepts it if u < exp(log_ratio) with the
    Metropolis–Hastings log ratio of the Gaussian proposal kernel; an unadjusted one accepts every finite proposal.
    A non-finite proposal is always rejected.

    :param rng: source of ξ and u when they are not given explicitly.
    :param noise: explicit standard Gaussian ξ.
    :param uniform: explicit uniform u on [0, 1).
    """
    model = config.model
    x = model.check_dimension(x)
    h = config.resolved_step_size if step_size is None else step_size
    if not h > 0:
        raise exc.ContractError(f'Step size must be positive, but it is {h}.')
    if noise is None:
        noise = rng.standard_normal(x.shape)
    if uniform is None and config.adjusted:
        uniform = rng.random(x.shape[:-1])
    chains = _Chains(x, log_density_star(x, model), grad_log_density_star(x, model))
    h_array = np.full(x.shape[:-1], float(h))
    new, accepted, log_ratio, finite = _advance(chains, model, h_array, np.asarray(noise, dtype=float),
                                                None if uniform is None else np.asarray(uniform), config.adjusted)
    if not np.all(finite):
        log.warning('Rejected %s non-finite proposals.', int(np.size(finite) - np.count_nonzero(finite)))
    return MalaStep(new.x, accepted, log_ratio, finite)


def effective_sample_size(series: np.ndarray) -> float:
    """Return the effective size of a correlated series by the initial positive sequence estimator."""
    series = np.asarray(series, dtype=float)
    m = series.size
    centered = series - series.mean()
    if m < 4 or not np.any(centered):
        return float(m)
    spectrum = np.fft.rfft(centered, n=2 * m)
    autocovariance = np.fft.irfft(spectrum * np.conj(spectrum))[:m]
    rho = autocovariance / autocovariance[0]
    tau = -1.
    for k in range(0, m - 1, 2):
        pair = rho[k] + rho[k + 1]
        if pair <= 0:
            break
        tau += 2 * pair
    return m / max(tau, 1. / m)


class _ChunkResult(NamedTuple):
    samples: np.ndarray
    accepted: int
    steps: int
    ess: float
    nonfinite: int


def _run_chain_chunk(run: MalaConfig, chain_ids: Sequence[int]) -> _ChunkResult:
    model = run.model
    n = model.n
    factory = StreamFactory(run.seed)
    sigma = math.sqrt(model.phi.variance)
    x = np.stack([factory.generator(Purpose.CHAIN_INITIAL, c).normal(0., sigma, n) for c in chain_ids])
    chains = _Chains(x, log_density_star(x, model), grad_log_density_star(x, model))
    noise = NoiseBlocks(factory.generators(Purpose.CHAIN_PROPOSAL, chain_ids), (n,), config.NOISE_BLOCK_STEPS)
    uniform = NoiseBlocks(factory.generators(Purpose.CHAIN_ACCEPTANCE, chain_ids), (), config.NOISE_BLOCK_STEPS,
                          kind='uniform')
    h = np.full(len(chain_ids), run.resolved_step_size)
    tuning = run.adjusted and run.tune
    window = np.zeros(len(chain_ids))
    window_rate = None
    nonfinite = 0

    for step in range(1, run.burn_in + 1):
        chains, accepted, _, finite = _advance(chains, model, h, noise.next(), uniform.next(), run.adjusted)
        nonfinite += int(np.size(finite) - np.count_nonzero(finite))
        window += accepted
        if tuning and step % config.MALA_TUNING_WINDOW == 0:
            rate = window / config.MALA_TUNING_WINDOW
            h = np.where(rate < config.MALA_TARGET_ACCEPTANCE - config.MALA_ACCEPTANCE_BAND, h * 0.8, h)
            h = np.where(rate > config.MALA_TARGET_ACCEPTANCE + config.MALA_ACCEPTANCE_BAND, h * 1.2, h)
            window_rate = float(rate.mean())
            window[:] = 0
    if window_rate is not None and window_rate < config.MALA_MIN_ACCEPTANCE:
        raise exc.StepSizeError(f'Acceptance rate {window_rate:.3g} of chains {chain_ids[0]} to {chain_ids[-1]} in '
                                f'the last tuning window is below {config.MALA_MIN_ACCEPTANCE}; retune the step size.')

    samples = np.empty((len(chain_ids), run.chain_length))
    accepted_count = 0
    for sample in range(run.chain_length):
        for _ in range(run.thinning):
            chains, accepted, _, finite = _advance(chains, model, h, noise.next(), uniform.next(), run.adjusted)
            accepted_count += int(np.count_nonzero(accepted))
            nonfinite += int(np.size(finite) - np.count_nonzero(finite))
        samples[:, sample] = stable_sum(chains.x) / n ** 0.75
    steps = len(chain_ids) * run.chain_length * run.thinning
    if run.adjusted and accepted_count < config.MALA_MIN_ACCEPTANCE * steps:
        raise exc.StepSizeError(f'Acceptance rate {accepted_count / steps:.3g} of chains {chain_ids[0]} to '
                                f'{chain_ids[-1]} is below {config.MALA_MIN_ACCEPTANCE}; retune the step size.')
    ess = sum(effective_sample_size(row) for row in samples)
    log.debug('Sampled chains %s to %s with final mean step size %s.', chain_ids[0], chain_ids[-1], h.mean())
    return _ChunkResult(samples, accepted_count, steps, ess, nonfinite)


def sample_equilibrium(run: MalaConfig, workers: int = 1) -> EquilibriumSamples:
    """Run the chains and return their kept values of S/n^{3/4} with diagnostics.

    Chains start from i.i.d. N(0, σ²) coordinates. Chains are advanced together in chunks of fixed size, each with its
    own random streams, so the samples are the same for every worker count.

    :raises socdyn.exc.StepSizeError: if the acceptance rate after tuning is below 0.05.
    """
    log.info('Sampling %s chains of %s particles for %s sweeps each with step size %s on %s workers.', run.chains,
             run.model.n, run.sweeps, run.resolved_step_size, workers)
    chunks = chunk_ranges(run.chains, config.REPLICA_CHUNK_SIZE)
    results: List[_ChunkResult] = map_chunks(functools.partial(_run_chain_chunk, run), chunks, workers)
    samples = np.concatenate([r.samples.ravel() for r in results])
    steps = sum(r.steps for r in results)
    nonfinite = sum(r.nonfinite for r in results)
    if nonfinite:
        log.warning('Rejected %s non-finite proposals.', nonfinite)
    diagnostics = ChainDiagnostics(acceptance_rate=sum(r.accepted for r in results) / steps,
                                   effective_sample_estimate=sum(r.ess for r in results), sweep_count=run.sweeps,
                                   nonfinite_proposals=nonfinite)
    log.info('Finished sampling with acceptance rate %.3f and effective sample size %.1f.',
             diagnostics.acceptance_rate, diagnostics.effective_sample_estimate)
    return EquilibriumSamples(samples, diagnostics, chains=run.chains)


def importance_moments(model: StarDensity, orders: Iterable[int] = (1, 2), draws: int = config.IMPORTANCE_DRAWS,
                       seed: int = 0) -> Dict[int, MomentEstimate]:
    """Estimate moments of S/n^{3/4} under the equilibrium density by self-normalized importance sampling.

    Proposals are i.i.d. N(0, σ²) configurations, which have the product density exp(2Σφ) of the Gaussian potential,
    so the weights are exp(½S²/(T+1)). They are bounded by exp(n/2). Standard errors are those of the ratio estimator,
    sqrt(Σw²(y − μ)²) for normalized weights w.

    :raises socdyn.exc.ContractError: if the potential is not the Gaussian one.
    """
    if model.phi.kind is not PhiKind.GAUSSIAN:
        raise exc.ContractError('Importance sampling needs the Gaussian potential as its proposal.')
    if draws < 2:
        raise exc.ContractError(f'Number of draws must be at least 2, but it is {draws}.')
    n = model.n
    rng = StreamFactory(seed).generator(Purpose.IMPORTANCE)
    sigma = math.sqrt(model.phi.sigma_sq)
    values, log_weights = [], []
    for block in chunk_ranges(draws, config.IMPORTANCE_BLOCK):
        x = rng.normal(0., sigma, (len(block), n))
        s, t = stable_sum(x), stable_sum(x * x)
        values.append(s / n ** 0.75)
        log_weights.append(0.5 * s * s / (t + 1) if model.interaction else np.zeros(len(block)))
    y, log_w = np.concatenate(values), np.concatenate(log_weights)
    w = np.exp(log_w - log_w.max())
    w /= w.sum()
    estimates = {}
    for k in sorted(set(orders)):
        if k < 1:
            raise exc.ContractError(f'Moment orders must be positive, but one is {k}.')
        powers = y ** k
        mean = float(np.sum(w * powers))
        estimates[k] = MomentEstimate(mean, math.sqrt(float(np.sum(w * w * (powers - mean) ** 2))))
    log.debug('Importance sampling of %s particles kept an effective %.1f of %s draws.', n, 1 / np.sum(w * w), draws)
    return estimates
