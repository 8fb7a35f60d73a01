import dataclasses
import functools
import logging
import math
from typing import List, Optional, Sequence

import numpy as np

import socdyn.config as config
import socdyn.exc as exc
from socdyn.model import interacting_drift, ParticleState, PhiModel, ScalarFunction, stable_sum
from socdyn.report import PathLike, write_columns
from socdyn.util import chunk_ranges, map_chunks, NoiseBlocks, Purpose, StreamFactory

log = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class SdeRunConfig:
    """Run parameters of the n-particle system.

    :param n: number of particles.
    :param phi: single-site potential.
    :param horizon_rescaled: horizon in rescaled time t = s/√n.
    :param dt_natural: step in natural time. It defaults to 0.01/max(1, σ²).
    :param record_stride: number of steps between recorded observables.
    :param seed: 64-bit seed of all random streams of the run.
    :param snapshot_full_state: whether to also record the full configuration at record points.
    :param interaction: whether the mean-field term of the drift is active. Disabling it is a diagnostic mode.
    :param centering: value subtracted from T/n in T̃. It defaults to the variance σ² of ρ.
    :param initial: initial configuration shared by all replicas. It defaults to an i.i.d. N(0, σ²) draw per replica.
    """
    n: int
    phi: PhiModel
    horizon_rescaled: float
    dt_natural: Optional[float] = None
    record_stride: int = 1
    seed: int = 0
    snapshot_full_state: bool = False
    interaction: bool = True
    centering: Optional[float] = None
    initial: Optional[np.ndarray] = dataclasses.field(default=None, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise exc.ContractError(f'Number of particles must be positive, but it is {self.n}.')
        if not self.horizon_rescaled > 0:
            raise exc.ContractError(f'Horizon must be positive, but it is {self.horizon_rescaled}.')
        if not self.dt > 0:
            raise exc.ContractError(f'Time step must be positive, but it is {self.dt}.')
        if self.record_stride < 1:
            raise exc.ContractError(f'Record stride must be positive, but it is {self.record_stride}.')
        if self.dt * self.record_stride > math.sqrt(self.n) * self.horizon_rescaled:
            raise exc.ContractError(f'A stride of {self.record_stride} steps of {self.dt} exceeds the natural horizon '
                                    f'{math.sqrt(self.n) * self.horizon_rescaled}.')
        if self.initial is not None and np.shape(self.initial) != (self.n,):
            raise exc.ContractError(f'Initial configuration must have shape ({self.n},), but it is '
                                    f'{np.shape(self.initial)}.')

    @property
    def dt(self) -> float:
        if self.dt_natural is not None:
            return self.dt_natural
        return 0.01 / max(1., self.sigma_sq)

    @property
    def sigma_sq(self) -> float:
        return self.centering if self.centering is not None else self.phi.variance

    @property
    def total_steps(self) -> int:
        return max(1, round(math.sqrt(self.n) * self.horizon_rescaled / self.dt))

    def record_steps(self) -> List[int]:
        steps = list(range(0, self.total_steps + 1, self.record_stride))
        if steps[-1] != self.total_steps:
            steps.append(self.total_steps)
        return steps


@dataclasses.dataclass(frozen=True)
class RescaledPath:
    """Observables S̃(t) = S(√n t)/n^{3/4} and T̃(t) = n^{1/4}(T(√n t)/n − σ²) at record times t.

    :param states: full configurations at the record times, one row each, if they were recorded.
    """
    times: np.ndarray
    s_tilde: np.ndarray
    t_tilde: np.ndarray
    seed: int
    n: int
    sigma_sq: float
    replica: int = 0
    states: Optional[np.ndarray] = None

    def __post_init__(self):
        lengths = {len(self.times), len(self.s_tilde), len(self.t_tilde)}
        if len(lengths) != 1:
            raise exc.ContractError(f'Path vectors must have equal lengths, but they have lengths {lengths}.')
        if np.any(np.diff(self.times) <= 0):
            raise exc.ContractError('Path times must be strictly increasing.')

    @classmethod
    def from_sums(cls, times: np.ndarray, s_sums: np.ndarray, t_sums: np.ndarray, *, n: int, sigma_sq: float,
                  seed: int, replica: int = 0, states: Optional[np.ndarray] = None) -> 'RescaledPath':
        s_tilde = np.asarray(s_sums, dtype=float) / n ** 0.75
        t_tilde = n ** 0.25 * (np.asarray(t_sums, dtype=float) / n - sigma_sq)
        return cls(np.asarray(times, dtype=float), s_tilde, t_tilde, seed=seed, n=n, sigma_sq=sigma_sq,
                   replica=replica, states=states)

    def __len__(self) -> int:
        return len(self.times)

    def prefix(self, length: int) -> 'RescaledPath':
        states = None if self.states is None else self.states[:length]
        return dataclasses.replace(self, times=self.times[:length], s_tilde=self.s_tilde[:length],
                                   t_tilde=self.t_tilde[:length], states=states)

    def to_csv(self, path: PathLike) -> None:
        write_columns(path, {'t': self.times, 's_tilde': self.s_tilde, 't_tilde': self.t_tilde})


def _initial_positions(n: int, sigma_sq: float, factory: StreamFactory, replica: int) -> np.ndarray:
    return factory.generator(Purpose.SYSTEM_INITIAL, replica).normal(0., math.sqrt(sigma_sq), n)


def init_iid_gaussian(n: int, sigma_sq: float, seed: int, replica: int = 0) -> ParticleState:
    """Return n i.i.d. N(0, σ²) positions drawn from the initial-state stream of the replica."""
    if n < 1:
        raise exc.ContractError(f'Number of particles must be positive, but it is {n}.')
    if not sigma_sq > 0:
        raise exc.ContractError(f'Variance must be positive, but it is {sigma_sq}.')
    return ParticleState.from_positions(_initial_positions(n, sigma_sq, StreamFactory(seed), replica))


def _em_increment(x: np.ndarray, s_sum: np.ndarray, t_sum: np.ndarray, dt: float, noise: np.ndarray,
                  phi_prime: ScalarFunction, interaction: bool):
    increment = interacting_drift(x, s_sum, t_sum, phi_prime, interaction) * dt + noise
    new_s = s_sum + stable_sum(increment)
    new_t = t_sum + stable_sum(increment * (2 * x + increment))
    return x + increment, new_s, new_t


def em_step_system(state: ParticleState, dt: float, noise: np.ndarray, phi: PhiModel, *, step: int = 0,
                   interaction: bool = True) -> ParticleState:
    """Return the Euler–Maruyama update x + drift(x)·dt + noise of a state.

    The noise is the √dt-scaled Gaussian increment. The cached sums are updated incrementally.

    :raises socdyn.exc.BlowUpError: if the updated state is not finite.
    """
    noise = np.asarray(noise, dtype=float)
    if noise.shape != state.x.shape:
        raise exc.ContractError(f'Noise must have shape {state.x.shape}, but it is {noise.shape}.')
    x, s, t = _em_increment(state.x, np.asarray(state.s_sum), np.asarray(state.t_sum), dt, noise, phi.phi_prime,
                            interaction)
    if not (np.isfinite(t) and np.isfinite(s)):
        raise exc.BlowUpError(f'Particle state became non-finite at step {step}.', step=step)
    return ParticleState(x=x, s_sum=float(s), t_sum=float(t), natural_time=state.natural_time + dt)


def _integrate_chunk(run: SdeRunConfig, replicas: Sequence[int]) -> List[RescaledPath]:
    n, dt, sigma_sq = run.n, run.dt, run.sigma_sq
    factory = StreamFactory(run.seed)
    if run.initial is not None:
        x = np.tile(np.asarray(run.initial, dtype=float), (len(replicas), 1))
    else:
        x = np.stack([_initial_positions(n, sigma_sq, factory, r) for r in replicas])
    s, t = stable_sum(x), stable_sum(x * x)
    noise = NoiseBlocks(factory.generators(Purpose.SYSTEM_DYNAMICS, replicas), (n,), config.NOISE_BLOCK_STEPS)
    sqrt_dt = math.sqrt(dt)
    record_steps = run.record_steps()
    s_records, t_records = [s.copy()], [t.copy()]
    state_records = [x.copy()] if run.snapshot_full_state else []

    def paths(length: int) -> List[RescaledPath]:
        times = np.array(record_steps[:length]) * dt / math.sqrt(n)
        s_all, t_all = np.stack(s_records[:length], axis=1), np.stack(t_records[:length], axis=1)
        states = np.stack(state_records[:length], axis=1) if state_records else None
        return [RescaledPath.from_sums(times, s_all[i], t_all[i], n=n, sigma_sq=sigma_sq, seed=run.seed, replica=r,
                                       states=None if states is None else states[i])
                for i, r in enumerate(replicas)]

    next_record = 1
    for step in range(1, run.total_steps + 1):
        x, s, t = _em_increment(x, s, t, dt, sqrt_dt * noise.next(), run.phi.phi_prime, run.interaction)
        finite = np.isfinite(s) & np.isfinite(t)
        if not finite.all():
            bad = int(np.flatnonzero(~finite)[0])
            raise exc.BlowUpError(f'Replica {replicas[bad]} of {n} particles became non-finite at step {step}.',
                                  step=step, path=paths(next_record)[bad])
        if step % config.RESYNC_INTERVAL == 0:
            s, t = stable_sum(x), stable_sum(x * x)
        if next_record < len(record_steps) and step == record_steps[next_record]:
            s_records.append(s.copy())
            t_records.append(t.copy())
            if run.snapshot_full_state:
                state_records.append(x.copy())
            next_record += 1
    log.debug('Integrated replicas %s to %s of %s particles.', replicas[0], replicas[-1], n)
    return paths(len(record_steps))


def simulate_replicas(run: SdeRunConfig, replicas: int, workers: int = 1) -> List[RescaledPath]:
    """Integrate replicas ``0, …, replicas − 1`` of the system and return their paths in replica order.

    Replicas are integrated together in chunks of fixed size, each replica with its own random streams, so the paths
    are the same for every worker count.

    :raises socdyn.exc.BlowUpError: if a replica becomes non-finite. It carries the replica's last finite path prefix.
    """
    if replicas < 1:
        raise exc.ContractError(f'Number of replicas must be positive, but it is {replicas}.')
    log.info('Simulating %s replicas of %s particles over %s steps of %s in natural time on %s workers.', replicas,
             run.n, run.total_steps, run.dt, workers)
    chunks = chunk_ranges(replicas, config.REPLICA_CHUNK_SIZE)
    paths = [p for chunk in map_chunks(functools.partial(_integrate_chunk, run), chunks, workers) for p in chunk]
    log.info('Finished simulating %s replicas of %s particles.', replicas, run.n)
    return paths


def simulate_system(run: SdeRunConfig, replica: int = 0) -> RescaledPath:
    """Integrate one replica of the system from time 0 to √n times the rescaled horizon."""
    return _integrate_chunk(run, [replica])[0]
