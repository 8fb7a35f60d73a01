import dataclasses
import functools
import logging
import math
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

import socdyn.config as config
import socdyn.exc as exc
from socdyn.model import ArrayLike
from socdyn.report import PathLike, write_columns
from socdyn.util import adaptive_simpson, chunk_ranges, lanczos_gamma, map_chunks, NoiseBlocks, Purpose, StreamFactory

log = logging.getLogger(__name__)


def check_gamma_constant() -> float:
    """Compare the stored Γ(1/4) against a Lanczos evaluation and return their relative difference."""
    difference = abs(lanczos_gamma(0.25) / config.GAMMA_QUARTER - 1)
    if difference > config.GAMMA_SELF_CHECK_TOLERANCE:
        raise exc.ContractError(f'Stored Γ(1/4)={config.GAMMA_QUARTER} differs from its Lanczos evaluation by a '
                                f'relative {difference}.')
    return difference


check_gamma_constant()


@dataclasses.dataclass(frozen=True)
class QuarticLaw:
    """Probability law with density c·exp(−λs⁴), the fluctuation law of the critical model.

    By default λ = 1/(4σ⁴) and c = (√2/σ)/Γ(1/4), the invariant law of dz = −z³/(2σ⁴)dt + dB. For a potential with
    variance σ² and fourth moment μ₄, see :meth:`from_moments`.

    :param sigma_sq: variance σ² of ρ.
    :param mu4: fourth moment μ₄ of ρ. It defaults to the Gaussian value 3σ⁴.
    """
    sigma_sq: float
    mu4: Optional[float] = None

    def __post_init__(self):
        if not self.sigma_sq > 0:
            raise exc.ContractError(f'Variance must be positive, but it is {self.sigma_sq}.')
        if self.mu4 is not None and not self.mu4 > 0:
            raise exc.ContractError(f'Fourth moment must be positive, but it is {self.mu4}.')

    @classmethod
    def from_moments(cls, sigma_sq: float, mu4: float) -> 'QuarticLaw':
        """Return the law with density (4μ₄/(3σ⁸))^{1/4}Γ(1/4)^{-1}exp(−μ₄s⁴/(12σ⁸))."""
        return cls(sigma_sq, mu4)

    @property
    def quartic_coefficient(self) -> float:
        mu4 = 3 * self.sigma_sq ** 2 if self.mu4 is None else self.mu4
        return mu4 / (12 * self.sigma_sq ** 4)

    @property
    def scale(self) -> float:
        """Return (4λ)^{-1/4}, which is σ in the Gaussian case."""
        return (4 * self.quartic_coefficient) ** -0.25

    @property
    def normalizer(self) -> float:
        return 2 * self.quartic_coefficient ** 0.25 / config.GAMMA_QUARTER

    @property
    def truncation(self) -> float:
        return config.QUARTIC_TRUNCATION_SIGMAS * self.scale

    def pdf(self, s: ArrayLike) -> ArrayLike:
        s = np.asarray(s, dtype=float)
        s_sq = s * s
        return self.normalizer * np.exp(-self.quartic_coefficient * s_sq * s_sq)

    def _pdf_scalar(self, s: float) -> float:
        return self.normalizer * math.exp(-self.quartic_coefficient * s ** 4)

    def cdf(self, s: ArrayLike) -> ArrayLike:
        """Return the CDF by adaptive quadrature of the density from 0, using its symmetry.

        Points are sorted by magnitude and the density is integrated between consecutive ones, so a whole sample is
        evaluated in one sweep. Beyond the truncation point the tail mass is below 1e−13 and is dropped.
        """
        s = np.asarray(s, dtype=float)
        flat = s.ravel()
        magnitude = np.minimum(np.abs(flat), self.truncation)
        order = np.argsort(magnitude, kind='stable')
        knots = np.concatenate([[0.], magnitude[order]])
        tol = max(config.QUADRATURE_TOLERANCE / max(1, flat.size), config.QUADRATURE_TOLERANCE_FLOOR)
        pieces = [adaptive_simpson(self._pdf_scalar, a, b, tol) for a, b in zip(knots[:-1], knots[1:])]
        half_mass = np.empty_like(magnitude)
        half_mass[order] = np.cumsum(pieces)
        result = np.clip(0.5 + np.sign(flat) * half_mass, 0., 1.)
        return result.reshape(s.shape) if s.ndim else float(result[0])

    def expectation(self, func: Callable[[float], float]) -> float:
        """Return ∫func·q over the truncated support by adaptive quadrature."""
        bound = self.truncation
        return adaptive_simpson(lambda s: func(s) * self._pdf_scalar(s), -bound, bound, config.QUADRATURE_TOLERANCE)

    def mass(self) -> float:
        return self.expectation(lambda s: 1.)

    def moment(self, order: int) -> float:
        """Return a raw moment by quadrature. Odd moments are 0 by symmetry."""
        if order % 2:
            return 0.
        return 2 * adaptive_simpson(lambda s: s ** order * self._pdf_scalar(s), 0., self.truncation,
                                    config.QUADRATURE_TOLERANCE)

    def closed_form_moment(self, order: int) -> float:
        """Return a raw moment as λ^{−k/4}Γ((k+1)/4)/Γ(1/4) for even order k."""
        if order % 2:
            return 0.
        return self.quartic_coefficient ** (-order / 4) * lanczos_gamma((order + 1) / 4) / config.GAMMA_QUARTER

    def moments(self, orders: Iterable[int] = range(1, 7)) -> Dict[int, float]:
        return {k: self.moment(k) for k in orders}


def quartic_pdf(s: ArrayLike, sigma_sq: float) -> ArrayLike:
    return QuarticLaw(sigma_sq).pdf(s)


def quartic_cdf_and_moments(sigma_sq: float) -> Tuple[Callable[[ArrayLike], ArrayLike], Dict[int, float]]:
    law = QuarticLaw(sigma_sq)
    return law.cdf, law.moments()


def limit_drift(z: ArrayLike, sigma_sq: float) -> ArrayLike:
    return -(z * z * z) / (2 * sigma_sq * sigma_sq)


def em_step_limit(z: ArrayLike, dt: float, noise: ArrayLike, sigma_sq: float) -> ArrayLike:
    return z + limit_drift(z, sigma_sq) * dt + noise


@dataclasses.dataclass(frozen=True)
class LimitRunConfig:
    """Run parameters of the limit equation dz = −z³/(2σ⁴)dt + dB.

    :param record_stride: steps between recorded path values. Paths are not kept if it is None.
    :param noise_scale: multiplier of the Brownian increments. Zero is a diagnostic mode.
    :param z0: initial value of every replica.
    """
    sigma_sq: float
    dt: float
    horizon: float
    replicas: int
    seed: int = 0
    record_stride: Optional[int] = None
    noise_scale: float = 1.
    z0: float = 0.

    def __post_init__(self):
        if not self.sigma_sq > 0:
            raise exc.ContractError(f'Variance must be positive, but it is {self.sigma_sq}.')
        if not 0 < self.dt < self.horizon:
            raise exc.ContractError(f'Time step {self.dt} must be positive and below the horizon {self.horizon}.')
        if self.replicas < 1:
            raise exc.ContractError(f'Number of replicas must be positive, but it is {self.replicas}.')
        if self.record_stride is not None and self.record_stride < 1:
            raise exc.ContractError(f'Record stride must be positive, but it is {self.record_stride}.')

    @property
    def total_steps(self) -> int:
        return round(self.horizon / self.dt)


@dataclasses.dataclass(frozen=True)
class LimitSamples:
    """Terminal values of the replicas and, if recorded, their paths with one row per replica."""
    terminal: np.ndarray
    times: Optional[np.ndarray] = None
    paths: Optional[np.ndarray] = None

    def to_csv(self, path: PathLike) -> None:
        write_columns(path, {'u_T': self.terminal})


def _integrate_limit_chunk(run: LimitRunConfig, replicas: Sequence[int]) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    factory = StreamFactory(run.seed)
    noise = NoiseBlocks(factory.generators(Purpose.LIMIT_DYNAMICS, replicas), (), config.NOISE_BLOCK_STEPS)
    scale = run.noise_scale * math.sqrt(run.dt)
    z = np.full(len(replicas), run.z0)
    records: List[np.ndarray] = [z.copy()]
    for step in range(1, run.total_steps + 1):
        z = em_step_limit(z, run.dt, scale * noise.next(), run.sigma_sq)
        if not np.all(np.isfinite(z)):
            bad = replicas[int(np.flatnonzero(~np.isfinite(z))[0])]
            raise exc.BlowUpError(f'Replica {bad} of the limit equation became non-finite at step {step}.', step=step)
        if run.record_stride and step % run.record_stride == 0:
            records.append(z.copy())
    paths = np.stack(records, axis=1) if run.record_stride else None
    return z, paths


def simulate_limit(run: LimitRunConfig, workers: int = 1) -> LimitSamples:
    """Integrate the replicas of the limit equation from z0 by Euler–Maruyama and return their terminal values."""
    log.info('Simulating %s replicas of the limit equation over %s steps of %s on %s workers.', run.replicas,
             run.total_steps, run.dt, workers)
    chunks = chunk_ranges(run.replicas, config.LIMIT_REPLICA_CHUNK_SIZE)
    results = map_chunks(functools.partial(_integrate_limit_chunk, run), chunks, workers)
    terminal = np.concatenate([z for z, _ in results])
    times, paths = None, None
    if run.record_stride:
        paths = np.concatenate([p for _, p in results])
        times = np.arange(paths.shape[1]) * run.record_stride * run.dt
    log.info('Finished simulating %s replicas of the limit equation.', run.replicas)
    return LimitSamples(terminal=terminal, times=times, paths=paths)
