import dataclasses
import enum
import functools
import logging
from typing import Callable, Optional, Union

import numpy as np
import scipy.integrate

import socdyn.config as config
import socdyn.exc as exc

log = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]
ScalarFunction = Callable[[ArrayLike], ArrayLike]

_EVENNESS_TOLERANCE = 1e-12
_INTEGRABILITY_EDGE_RATIO = 1e-3  # Max of exp(2φ) at the hull edges relative to its peak.
_INTEGRABILITY_POINTS = 2001


class PhiKind(enum.Enum):
    GAUSSIAN = 'gaussian'
    CUSTOM = 'custom'
    QUARTIC = 'quartic'


def _gaussian_phi(x: ArrayLike, *, sigma_sq: float) -> ArrayLike:
    return -(x * x) / (4 * sigma_sq)


def _gaussian_phi_prime(x: ArrayLike, *, sigma_sq: float) -> ArrayLike:
    return -x / (2 * sigma_sq)


def _quartic_phi(x: ArrayLike, *, sigma_sq: float, quartic: float) -> ArrayLike:
    return -(x * x) / (4 * sigma_sq) - quartic * x ** 4


def _quartic_phi_prime(x: ArrayLike, *, sigma_sq: float, quartic: float) -> ArrayLike:
    return -x / (2 * sigma_sq) - 4 * quartic * x ** 3


def _double_factorial(k: int) -> int:
    return 1 if k <= 0 else k * _double_factorial(k - 2)


@dataclasses.dataclass(frozen=True)
class PhiModel:
    """Single-site potential φ of the model, with ρ(dx) ∝ exp(2φ(x))dx.

    Use :meth:`gaussian`, :meth:`quartic` or :meth:`custom` to construct an instance. For use with more than one
    worker process, the functions of a custom model must be picklable, e.g. defined at module level.

    :param phi: even potential.
    :param phi_prime: derivative of `phi`.
    :param kind: whether this is the Gaussian potential, the quartic family or a user supplied one.
    :param confinement_constant: constant C with xφ'(x) ≤ C(1+x²).
    :param sigma_sq: variance σ² of ρ in the Gaussian case, else None.
    """
    phi: ScalarFunction
    phi_prime: ScalarFunction
    kind: PhiKind
    confinement_constant: float
    sigma_sq: Optional[float] = None

    @classmethod
    def gaussian(cls, sigma_sq: float, confinement_constant: float = 1.) -> 'PhiModel':
        """Return the potential φ(x) = −x²/(4σ²) for which ρ is the centered normal law of variance σ²."""
        if not sigma_sq > 0:
            raise exc.ContractError(f'Variance must be positive, but it is {sigma_sq}.')
        return cls(phi=functools.partial(_gaussian_phi, sigma_sq=sigma_sq),
                   phi_prime=functools.partial(_gaussian_phi_prime, sigma_sq=sigma_sq),
                   kind=PhiKind.GAUSSIAN, confinement_constant=confinement_constant, sigma_sq=sigma_sq)

    @classmethod
    def quartic(cls, sigma_sq: float, quartic: float, confinement_constant: float = 1.) -> 'PhiModel':
        """Return φ(x) = −x²/(4σ²) − a·x⁴, for which ρ is not Gaussian when a > 0.

        Here σ² only scales the quadratic part; the variance of ρ is smaller for a > 0, see :attr:`variance`.
        """
        if not sigma_sq > 0:
            raise exc.ContractError(f'Variance must be positive, but it is {sigma_sq}.')
        if quartic < 0:
            raise exc.ContractError(f'Quartic coefficient must be nonnegative, but it is {quartic}.')
        return cls(phi=functools.partial(_quartic_phi, sigma_sq=sigma_sq, quartic=quartic),
                   phi_prime=functools.partial(_quartic_phi_prime, sigma_sq=sigma_sq, quartic=quartic),
                   kind=PhiKind.QUARTIC, confinement_constant=confinement_constant)

    @classmethod
    def custom(cls, phi: ScalarFunction, phi_prime: ScalarFunction, confinement_constant: float) -> 'PhiModel':
        """Return a user supplied potential. It is not validated here; see :func:`validate_phi`."""
        if not confinement_constant > 0:
            raise exc.ContractError(f'Confinement constant must be positive, but it is {confinement_constant}.')
        return cls(phi=phi, phi_prime=phi_prime, kind=PhiKind.CUSTOM, confinement_constant=confinement_constant)

    def moment(self, order: int) -> float:
        """Return the raw moment of the given order of ρ.

        Odd moments are zero since φ is even. For a non-Gaussian potential, even moments are computed by quadrature over
        the real line.
        """
        if order < 0:
            raise exc.ContractError(f'Moment order must be nonnegative, but it is {order}.')
        if order % 2:
            return 0.
        if self.kind is PhiKind.GAUSSIAN:
            return self.sigma_sq ** (order // 2) * _double_factorial(order - 1)

        def weight(x: float) -> float:
            return float(np.exp(2 * self.phi(x)))

        mass, _ = scipy.integrate.quad(weight, -np.inf, np.inf)
        raw, _ = scipy.integrate.quad(lambda x: x ** order * weight(x), -np.inf, np.inf)
        if not (np.isfinite(mass) and np.isfinite(raw) and mass > 0):
            raise exc.InvalidModel(f'Moment of order {order} of exp(2φ) could not be computed; exp(2φ) is '
                                   'apparently not integrable.')
        return raw / mass

    @property
    def variance(self) -> float:
        if self.kind is PhiKind.GAUSSIAN:
            return self.sigma_sq
        return self.moment(2)


@dataclasses.dataclass(frozen=True)
class ValidationReport:
    passed: bool
    violation: Optional[str] = None
    point: Optional[float] = None


def validate_phi(phi: PhiModel, grid: np.ndarray) -> ValidationReport:
    """Probe the hypotheses on φ at the points of a grid and return the first violation, if any.

    The checks, in order, are evenness at every grid point, the confinement inequality xφ'(x) ≤ C(1+x²) at every grid
    point, and integrability of exp(2φ) over the convex hull of the grid. Integrability is only spot-checked: the
    trapezoid estimate must be finite and exp(2φ) must have decayed at the hull edges to a small fraction of its peak.
    A narrow grid can therefore fail a potential which is in fact integrable.

    :raises socdyn.exc.ContractError: if the grid is empty or has non-finite entries.
    :raises socdyn.exc.InvalidModel: if φ or φ' is not finite at a grid point.
    """
    grid = np.asarray(grid, dtype=float).ravel()
    if not grid.size:
        raise exc.ContractError('Validation grid must not be empty.')
    if not np.all(np.isfinite(grid)):
        raise exc.ContractError('Validation grid must have only finite entries.')

    values = np.asarray(phi.phi(grid), dtype=float)
    mirrored = np.asarray(phi.phi(-grid), dtype=float)
    slopes = np.asarray(phi.phi_prime(grid), dtype=float)
    for name, array in (('φ', values), ('φ', mirrored), ("φ'", slopes)):
        if not np.all(np.isfinite(array)):
            bad = grid[~np.isfinite(array)][0]
            raise exc.InvalidModel(f'{name} is not finite at grid point x={bad}.')

    for x, value, mirror in zip(grid, values, mirrored):
        if abs(value - mirror) > _EVENNESS_TOLERANCE * max(1., abs(value)):
            return ValidationReport(False, f'φ is not even at x={x}: φ(x)={value} but φ(−x)={mirror}.', x)

    c = phi.confinement_constant
    for x, slope in zip(grid, slopes):
        lhs, rhs = x * slope, c * (1 + x * x)
        if lhs > rhs + _EVENNESS_TOLERANCE * max(1., abs(rhs)):
            return ValidationReport(False, f"Confinement fails at x={x}: xφ'(x)={lhs} exceeds C(1+x²)={rhs}.", x)

    low, high = grid.min(), grid.max()
    if low == high:
        return ValidationReport(False, f'Integrability of exp(2φ) cannot be estimated on the single point {low}.', low)
    hull = np.linspace(low, high, _INTEGRABILITY_POINTS)
    with np.errstate(over='ignore'):
        weights = np.exp(2 * np.asarray(phi.phi(hull), dtype=float))
        estimate = scipy.integrate.trapezoid(weights, hull)
    if not np.isfinite(estimate):
        return ValidationReport(False, f'Trapezoid estimate of ∫exp(2φ) over [{low}, {high}] is not finite.', high)
    peak = weights.max()
    for edge, weight in ((low, weights[0]), (high, weights[-1])):
        if weight > _INTEGRABILITY_EDGE_RATIO * peak:
            return ValidationReport(False, f'exp(2φ) has not decayed at x={edge}: {weight} relative to a peak of '
                                           f'{peak}; the estimate of ∫exp(2φ) grows with the hull.', edge)
    log.debug('Potential passed validation on %s grid points over [%s, %s].', grid.size, low, high)
    return ValidationReport(True)


def stable_sum(values: np.ndarray) -> np.ndarray:
    """Sum along the last axis in order of increasing magnitude, ties ordered by value.

    The result depends only on the multiset of summed values, so it is exactly invariant under permutation, and it is
    exactly odd under negation unless two values share a magnitude.
    """
    values = np.asarray(values, dtype=float)
    order = np.lexsort((values, np.abs(values)), axis=-1)
    return np.sum(np.take_along_axis(values, order, axis=-1), axis=-1)


@dataclasses.dataclass(frozen=True)
class ParticleState:
    """Configuration x of the n particles with its cached sums S = Σx and T = Σx².

    :param x: particle positions.
    :param s_sum: cached S.
    :param t_sum: cached T.
    :param natural_time: time of the configuration in the intrinsic time of the particle system.
    """
    x: np.ndarray
    s_sum: float
    t_sum: float
    natural_time: float = 0.

    @classmethod
    def from_positions(cls, x: np.ndarray, natural_time: float = 0.) -> 'ParticleState':
        x = np.array(x, dtype=float)
        if x.ndim != 1 or not x.size:
            raise exc.ContractError(f'Positions must be a nonempty vector, but their shape is {x.shape}.')
        return cls(x=x, s_sum=float(stable_sum(x)), t_sum=float(stable_sum(x * x)), natural_time=natural_time)

    @property
    def n(self) -> int:
        return self.x.size

    def sums_consistent(self, tolerance: float = config.SUM_TOLERANCE) -> bool:
        """Return whether the cached sums agree with recomputed ones within `tolerance`·n relative tolerance."""
        s, t = stable_sum(self.x), stable_sum(self.x * self.x)
        bound = tolerance * self.n
        return bool(self.t_sum >= 0 and abs(self.s_sum - s) <= bound * max(1., abs(s))
                    and abs(self.t_sum - t) <= bound * max(1., t))


@dataclasses.dataclass(frozen=True)
class StarDensity:
    """Unnormalized equilibrium density f* = exp(½S²/(T+1) + 2Σφ(x_i)) of n particles.

    With `interaction` false the mean-field factor is dropped and the density is the product one, exp(2Σφ(x_i)). This
    is a diagnostic mode.
    """
    phi: PhiModel
    n: int
    interaction: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise exc.ContractError(f'Number of particles must be positive, but it is {self.n}.')

    def check_dimension(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim < 1 or x.shape[-1] != self.n:
            raise exc.ContractError(f'Configuration must have {self.n} coordinates, but its shape is {x.shape}.')
        return x


def interacting_drift(x: np.ndarray, s_sum: ArrayLike, t_sum: ArrayLike, phi_prime: ScalarFunction,
                      interaction: bool = True) -> np.ndarray:
    """Return φ'(x_j) + ½(r − x_j r²) with r = S/(T+1) for configurations along the last axis of `x`.

    `s_sum` and `t_sum` have the shape of `x` without its last axis.
    """
    if not interaction:
        return np.asarray(phi_prime(x), dtype=float)
    r = np.asarray(np.asarray(s_sum) / (np.asarray(t_sum) + 1))[..., None]
    return phi_prime(x) + 0.5 * (r - x * r * r)


def drift_vector(state: ParticleState, phi: PhiModel) -> np.ndarray:
    return interacting_drift(state.x, state.s_sum, state.t_sum, phi.phi_prime)


def log_density_star(x: np.ndarray, model: StarDensity) -> ArrayLike:
    """Return log f*(x) up to the normalization constant, for one configuration or a batch along the last axis."""
    x = model.check_dimension(x)
    log_product = 2 * stable_sum(model.phi.phi(x))
    if not model.interaction:
        return log_product
    s, t = stable_sum(x), stable_sum(x * x)
    return 0.5 * s * s / (t + 1) + log_product


def grad_log_density_star(x: np.ndarray, model: StarDensity) -> np.ndarray:
    x = model.check_dimension(x)
    return 2. * interacting_drift(x, stable_sum(x), stable_sum(x * x), model.phi.phi_prime, model.interaction)


@dataclasses.dataclass(frozen=True)
class ConfinementDiagnostics:
    inner_product: float
    bound: float
    ratio_term: float


def confinement_diagnostics(x: np.ndarray, model: StarDensity) -> ConfinementDiagnostics:
    """Return ⟨∇log f*(x), x⟩ with the bound S²/(T+1)² + 2C(n + ‖x‖²) on it, and the ratio term S²/(T+1)² ≤ n."""
    x = model.check_dimension(x)
    if x.ndim != 1:
        raise exc.ContractError(f'Confinement diagnostics take a single configuration, but the shape is {x.shape}.')
    s, t = stable_sum(x), stable_sum(x * x)
    ratio_term = float(s * s / ((t + 1) * (t + 1)))
    inner_product = float(stable_sum(grad_log_density_star(x, model) * x))
    bound = ratio_term + 2 * model.phi.confinement_constant * (model.n + float(t))
    return ConfinementDiagnostics(inner_product=inner_product, bound=bound, ratio_term=ratio_term)
