import dataclasses
import logging
import math
from typing import Callable, Dict, Iterable, Mapping, NamedTuple, Optional

import numpy as np

import socdyn.config as config
import socdyn.exc as exc
from socdyn.model import ArrayLike
from socdyn.particles import RescaledPath

log = logging.getLogger(__name__)


class MomentEstimate(NamedTuple):
    value: float
    stderr: float


@dataclasses.dataclass(frozen=True)
class GofReport:
    """Goodness-of-fit summary of a sample.

    :param ks_statistic: Kolmogorov–Smirnov distance.
    :param p_value_approx: p-value from the asymptotic Kolmogorov distribution.
    :param sample_size: size of the sample, or the effective size n₁n₂/(n₁ + n₂) for two samples.
    :param moments: raw empirical moments by order.
    """
    ks_statistic: float
    p_value_approx: float
    sample_size: float
    moments: Dict[int, float] = dataclasses.field(default_factory=dict)

    def to_json(self) -> dict:
        return {'ks': self.ks_statistic, 'p': self.p_value_approx, 'm': self.sample_size,
                'moments': {str(k): v for k, v in sorted(self.moments.items())}}


def _check_sample(sample: ArrayLike, name: str = 'Sample') -> np.ndarray:
    sample = np.asarray(sample, dtype=float).ravel()
    if not sample.size:
        raise exc.ContractError(f'{name} must not be empty.')
    if not np.all(np.isfinite(sample)):
        raise exc.ContractError(f'{name} must have only finite values.')
    return sample


def kolmogorov_survival(statistic: float, size: float) -> float:
    """Return the asymptotic probability that the KS distance of a sample of the given size exceeds `statistic`.

    This is the Kolmogorov series 2Σ(−1)^{k−1}exp(−2k²λ²) at λ = √m·D, truncated after a fixed number of terms.
    """
    lam = math.sqrt(size) * statistic
    if lam < 0.2:
        return 1.
    k = np.arange(1, config.KS_SERIES_TERMS + 1)
    series = 2 * np.sum((-1.) ** (k - 1) * np.exp(-2 * k * k * lam * lam))
    return float(min(1., max(0., series)))


def empirical_moments(sample: ArrayLike, orders: Iterable[int] = range(1, 5)) -> Dict[int, MomentEstimate]:
    """Return raw moments with standard errors sqrt((m_{2k} − m_k²)/m) of the sample mean of x^k.

    Sums are exact, so a sample closed under negation has odd moments of exactly 0.
    """
    sample = _check_sample(sample)
    m = sample.size
    estimates = {}
    for k in sorted(set(orders)):
        if k < 1:
            raise exc.ContractError(f'Moment orders must be positive, but one is {k}.')
        powers = sample ** k
        value = math.fsum(powers) / m
        second = math.fsum(powers * powers) / m
        estimates[k] = MomentEstimate(value, math.sqrt(max(0., second - value * value) / m))
    return estimates


def symmetrize(sample: ArrayLike) -> np.ndarray:
    sample = _check_sample(sample)
    return np.concatenate([sample, -sample])


def _moment_values(sample: np.ndarray) -> Dict[int, float]:
    return {k: v.value for k, v in empirical_moments(sample).items()}


def ks_one_sample(sample: ArrayLike, cdf: Callable[[np.ndarray], ArrayLike]) -> GofReport:
    """Compare a sample against a continuous CDF, which is called once on the sorted sample."""
    sample = np.sort(_check_sample(sample))
    m = sample.size
    f = np.asarray(cdf(sample), dtype=float)
    i = np.arange(1, m + 1)
    statistic = float(max(np.max(np.abs(f - i / m)), np.max(np.abs(f - (i - 1) / m))))
    return GofReport(statistic, kolmogorov_survival(statistic, m), m, _moment_values(sample))


def ks_two_sample(a: ArrayLike, b: ArrayLike) -> GofReport:
    """Compare two samples. The p-value uses the effective size n₁n₂/(n₁ + n₂); moments are of the first sample."""
    a, b = np.sort(_check_sample(a, 'First sample')), np.sort(_check_sample(b, 'Second sample'))
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side='right') / a.size
    cdf_b = np.searchsorted(b, pooled, side='right') / b.size
    statistic = float(np.max(np.abs(cdf_a - cdf_b)))
    size = a.size * b.size / (a.size + b.size)
    return GofReport(statistic, kolmogorov_survival(statistic, size), size, _moment_values(a))


@dataclasses.dataclass(frozen=True)
class ExitTimeReport:
    """Suprema of |S̃| and |T̃| over the record points of a path and its first exit time from the box [−k, k]².

    :param first_exit_rescaled: first record time with |S̃| ≥ k or |T̃| ≥ k, or None if there is none.
    """
    k: float
    first_exit_rescaled: Optional[float]
    sup_abs_s: float
    sup_abs_t: float

    @property
    def exited(self) -> bool:
        return self.first_exit_rescaled is not None

    def exit_or_infinity(self) -> float:
        return math.inf if self.first_exit_rescaled is None else self.first_exit_rescaled


def path_extrema(path: RescaledPath, k: float) -> ExitTimeReport:
    if not len(path):
        raise exc.ContractError('Path must not be empty.')
    if not k > 0:
        raise exc.ContractError(f'Box half-width must be positive, but it is {k}.')
    abs_s, abs_t = np.abs(path.s_tilde), np.abs(path.t_tilde)
    outside = (abs_s >= k) | (abs_t >= k)
    first_exit = float(path.times[np.argmax(outside)]) if outside.any() else None
    return ExitTimeReport(k, first_exit, float(abs_s.max()), float(abs_t.max()))


def loglog_slope(xs: Iterable[float], ys: Iterable[float]) -> float:
    """Return the least-squares slope of log(y) against log(x)."""
    slope, _ = np.polyfit(np.log(np.asarray(list(xs), dtype=float)), np.log(np.asarray(list(ys), dtype=float)), 1)
    return float(slope)


def collapsing_scaling(per_n_medians: Mapping[int, float]) -> float:
    """Return the log-log slope of the medians of sup|T̃| against n."""
    if len(per_n_medians) < 3:
        raise exc.ContractError(f'At least 3 distinct values of n are needed, but there are {len(per_n_medians)}.')
    ns = sorted(per_n_medians)
    return loglog_slope(ns, [per_n_medians[n] for n in ns])
