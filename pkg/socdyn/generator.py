"""Generators of the particle system, of the rescaled pair (S̃, T̃) and of the limit equation.

Two-argument functions are evaluated at x = S̃ and y = T̃. All functions accept arrays and broadcast.
"""

import dataclasses
import logging
import math
from typing import Callable, List, NamedTuple, Optional, Sequence

import numpy as np
import numpy.polynomial.polynomial as poly
import scipy.integrate

import socdyn.exc as exc
from socdyn.limit import QuarticLaw
from socdyn.model import ArrayLike, interacting_drift, PhiModel, ScalarFunction, stable_sum
from socdyn.particles import RescaledPath

log = logging.getLogger(__name__)

Function2DCallable = Callable[[ArrayLike, ArrayLike], ArrayLike]

_PROBE_GRID = np.linspace(-2., 2., 41)
_PROBE_STEP = 1e-4
_PROBE_TOLERANCE = 1e-5
_COARSE_STRIDE_VARIATION = 0.1
_CHECK_TOLERANCE = 1e-9


@dataclasses.dataclass(frozen=True)
class TestFunction:
    """Scalar function f with its first four derivatives.

    The derivatives are checked against central differences of the previous order on a probe grid at construction.

    :raises socdyn.exc.ContractError: if a derivative disagrees with the central differences.
    """
    __test__ = False  # Not a test case.

    value: ScalarFunction
    d1: ScalarFunction
    d2: ScalarFunction
    d3: ScalarFunction
    d4: ScalarFunction
    name: str = 'f'
    validate: bool = dataclasses.field(default=True, compare=False)

    def __post_init__(self):
        if self.validate:
            self.check_derivatives()

    def derivatives(self) -> List[ScalarFunction]:
        return [self.value, self.d1, self.d2, self.d3, self.d4]

    def check_derivatives(self, grid: np.ndarray = _PROBE_GRID, step: float = _PROBE_STEP,
                          tolerance: float = _PROBE_TOLERANCE) -> None:
        functions = self.derivatives()
        for order in range(1, 5):
            lower, derivative = functions[order - 1], functions[order]
            estimate = (np.asarray(lower(grid + step)) - np.asarray(lower(grid - step))) / (2 * step)
            exact = np.asarray(derivative(grid), dtype=float) * np.ones_like(grid)
            deviation = np.abs(estimate - exact) / np.maximum(1., np.abs(exact))
            if not np.all(deviation <= tolerance):
                where = grid[np.argmax(deviation)]
                raise exc.ContractError(f'Derivative of order {order} of {self.name} disagrees with central '
                                        f'differences at x={where} by a relative {deviation.max():.3g}.')

    @classmethod
    def polynomial(cls, coefficients: Sequence[float], name: Optional[str] = None) -> 'TestFunction':
        """Return the polynomial with the given coefficients in increasing order of degree."""
        p = np.polynomial.Polynomial(coefficients)
        return cls(p, p.deriv(1), p.deriv(2), p.deriv(3), p.deriv(4), name=name or f'polynomial{tuple(coefficients)}')

    @classmethod
    def constant(cls, c: float) -> 'TestFunction':
        return cls.polynomial([c], name=f'{c}')

    @classmethod
    def monomial(cls, k: int) -> 'TestFunction':
        return cls.polynomial([0.] * k + [1.], name=f'x^{k}')

    @classmethod
    def sine(cls) -> 'TestFunction':
        return cls(np.sin, np.cos, lambda x: -np.sin(x), lambda x: -np.cos(x), np.sin, name='sin')


@dataclasses.dataclass(frozen=True)
class Function2D:
    """Two-argument C² function with its partial derivatives up to order 2."""
    value: Function2DCallable
    dx: Function2DCallable
    dy: Function2DCallable
    dxx: Function2DCallable
    dxy: Function2DCallable
    dyy: Function2DCallable
    name: str = 'f'

    @classmethod
    def polynomial(cls, coefficients: np.ndarray, name: str = 'polynomial') -> 'Function2D':
        """Return Σ c[i, j] x^i y^j."""
        c = np.asarray(coefficients, dtype=float)

        def evaluator(d: np.ndarray) -> Function2DCallable:
            return lambda x, y: poly.polyval2d(*np.broadcast_arrays(np.asarray(x, dtype=float),
                                                                    np.asarray(y, dtype=float)), d)

        cx, cy = poly.polyder(c, 1, axis=0), poly.polyder(c, 1, axis=1)
        return cls(evaluator(c), evaluator(cx), evaluator(cy), evaluator(poly.polyder(cx, 1, axis=0)),
                   evaluator(poly.polyder(cx, 1, axis=1)), evaluator(poly.polyder(cy, 1, axis=1)), name=name)

    @classmethod
    def monomial(cls, i: int, j: int) -> 'Function2D':
        c = np.zeros((i + 1, j + 1))
        c[i, j] = 1.
        return cls.polynomial(c, name=f'x^{i} y^{j}')

    @classmethod
    def of_x(cls, f: TestFunction) -> 'Function2D':
        """Return (x, y) ↦ f(x)."""
        def lift(func: ScalarFunction) -> Function2DCallable:
            return lambda x, y: np.asarray(func(x), dtype=float) + np.zeros_like(y, dtype=float)

        def zero(x: ArrayLike, y: ArrayLike) -> ArrayLike:
            return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)

        return cls(lift(f.value), lift(f.d1), zero, lift(f.d2), zero, zero, name=f.name)

    @classmethod
    def perturbation(cls, f: TestFunction, n: int, sigma_sq: float) -> 'Function2D':
        """Return F = f + n^{-1/4}H + n^{-1/2}K with H = −xyf'/(2σ²) and K = xy²(3f' + xf'')/(8σ⁴)."""
        a, b = n ** -0.25, n ** -0.5
        s2, s4 = 2 * sigma_sq, 8 * sigma_sq ** 2

        def terms(x: ArrayLike, y: ArrayLike):
            x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
            f0, f1, f2, f3, f4 = (np.asarray(d(x), dtype=float) for d in f.derivatives())
            g, g1, g2 = 3 * f1 + x * f2, 4 * f2 + x * f3, 5 * f3 + x * f4
            return x, y, f0, f1, f2, g, g1, g2, f3

        def value(x, y):
            x, y, f0, f1, _, g, *_ = terms(x, y)
            return f0 - a * x * y * f1 / s2 + b * x * y * y * g / s4

        def dx(x, y):
            x, y, _, f1, f2, g, g1, *_ = terms(x, y)
            return f1 - a * y * (f1 + x * f2) / s2 + b * y * y * (g + x * g1) / s4

        def dy(x, y):
            x, y, _, f1, _, g, *_ = terms(x, y)
            return -a * x * f1 / s2 + 2 * b * x * y * g / s4

        def dxx(x, y):
            x, y, _, _, f2, _, g1, g2, f3 = terms(x, y)
            return f2 - a * y * (2 * f2 + x * f3) / s2 + b * y * y * (2 * g1 + x * g2) / s4

        def dxy(x, y):
            x, y, _, f1, f2, g, g1, *_ = terms(x, y)
            return -a * (f1 + x * f2) / s2 + 2 * b * y * (g + x * g1) / s4

        def dyy(x, y):
            x, y, _, _, _, g, *_ = terms(x, y)
            return 2 * b * x * g / s4 + 0 * y

        return cls(value, dx, dy, dxx, dxy, dyy, name=f'F[{f.name}]')


@dataclasses.dataclass(frozen=True)
class GeneratorPoint:
    """Point (x, y) = (S̃, T̃) for n particles, with y > −σ²n^{1/4}."""
    x: float
    y: float
    n: int
    sigma_sq: float

    def __post_init__(self):
        check_domain(self.y, self.n, self.sigma_sq)


def check_domain(y: ArrayLike, n: int, sigma_sq: float) -> None:
    bound = -sigma_sq * n ** 0.25
    if not np.all(np.asarray(y) > bound):
        raise exc.DomainError(f'T̃ must exceed −σ²n^(1/4)={bound} for n={n} and σ²={sigma_sq}, but its minimum is '
                              f'{np.min(y)}.')


def h_n(y: ArrayLike, n: int, sigma_sq: float) -> ArrayLike:
    return 1 / (1 + y / (n ** 0.25 * sigma_sq) + 1 / (n * sigma_sq))


def apply_g_sigma(f: TestFunction, x: ArrayLike, sigma_sq: float) -> ArrayLike:
    """Return G_σf(x) = ½f''(x) − x³f'(x)/(2σ⁴)."""
    x = np.asarray(x, dtype=float)
    return 0.5 * f.d2(x) - x ** 3 * f.d1(x) / (2 * sigma_sq ** 2)


class GeneratorParts(NamedTuple):
    exact: ArrayLike
    truncated: ArrayLike
    remainder: ArrayLike
    r1: ArrayLike
    r2: ArrayLike
    eps1: ArrayLike
    eps2: ArrayLike


def g_tilde_n(f2d: Function2D, x: ArrayLike, y: ArrayLike, n: int, sigma_sq: float) -> ArrayLike:
    """Return the exact generator of (S̃, T̃) applied to f2d at points (x, y).

    :raises socdyn.exc.DomainError: if a point has y ≤ −σ²n^{1/4}.
    """
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    check_domain(y, n, sigma_sq)
    h = h_n(y, n, sigma_sq)
    root_n, quarter_n = math.sqrt(n), n ** 0.25
    drift_x = -root_n * x * (1 - h) / (2 * sigma_sq) - x ** 3 * h * h / (2 * sigma_sq ** 2)
    drift_y = -root_n * y / sigma_sq + x * x * h * h / (n ** 0.75 * sigma_sq ** 2)
    return (2 * x / quarter_n * f2d.dxy(x, y) + (2 * y / quarter_n + 2 * sigma_sq) * f2d.dyy(x, y)
            + 0.5 * f2d.dxx(x, y) + drift_x * f2d.dx(x, y) + drift_y * f2d.dy(x, y))


def g_tilde_n_parts(f2d: Function2D, x: ArrayLike, y: ArrayLike, n: int, sigma_sq: float) -> GeneratorParts:
    """Return the exact generator with its truncated expansion and the terms of the remainder.

    The truncated expansion keeps −√n y f_y/σ² − n^{1/4}xy f_x/(2σ⁴) + (xy² − x³σ²)f_x/(2σ⁶) + ½f_xx + 2σ²f_yy, and the
    remainder is f_x R1 + f_y R2 + 2xn^{-1/4}f_xy + 2yn^{-1/4}f_yy.
    """
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    exact = g_tilde_n(f2d, x, y, n, sigma_sq)
    h = h_n(y, n, sigma_sq)
    root_n, quarter_n, s2 = math.sqrt(n), n ** 0.25, sigma_sq
    eps1 = root_n * (h - 1 + y / (quarter_n * s2) - y * y / (root_n * s2 ** 2))
    eps2 = h * h - 1
    r1 = x * eps1 / (2 * s2) - x ** 3 * eps2 / (2 * s2 ** 2)
    r2 = x * x * h * h / (n ** 0.75 * s2 ** 2)
    fx, fy, fxx, fxy, fyy = f2d.dx(x, y), f2d.dy(x, y), f2d.dxx(x, y), f2d.dxy(x, y), f2d.dyy(x, y)
    truncated = (-root_n * y / s2 * fy - quarter_n * x * y / (2 * s2 ** 2) * fx
                 + (x * y * y - x ** 3 * s2) / (2 * s2 ** 3) * fx + 0.5 * fxx + 2 * s2 * fyy)
    remainder = fx * r1 + fy * r2 + 2 * x / quarter_n * fxy + 2 * y / quarter_n * fyy
    return GeneratorParts(exact, truncated, remainder, r1, r2, eps1, eps2)


def apply_g_tilde_n(f2d: Function2D, p: GeneratorPoint) -> float:
    return float(g_tilde_n(f2d, p.x, p.y, p.n, p.sigma_sq))


def observables(x_config: np.ndarray, sigma_sq: float):
    """Return (S̃, T̃) of a configuration."""
    x_config = np.asarray(x_config, dtype=float)
    n = x_config.shape[-1]
    return stable_sum(x_config) / n ** 0.75, n ** 0.25 * (stable_sum(x_config * x_config) / n - sigma_sq)


def psi_value(x_config: np.ndarray, f2d: Function2D, sigma_sq: float) -> ArrayLike:
    """Return Ψ_f(x) = f(S̃, T̃)."""
    return f2d.value(*observables(x_config, sigma_sq))


def psi_partials(x_config: np.ndarray, f2d: Function2D, sigma_sq: float):
    """Return the gradient and the diagonal of the Hessian of Ψ_f at a configuration."""
    x_config = np.asarray(x_config, dtype=float)
    n = x_config.shape[-1]
    x, y = observables(x_config, sigma_sq)
    fx, fy, fxx, fxy, fyy = f2d.dx(x, y), f2d.dy(x, y), f2d.dxx(x, y), f2d.dxy(x, y), f2d.dyy(x, y)
    gradient = (fx + 2 * x_config * fy) / n ** 0.75
    second = (fxx + 4 * x_config * fxy + 4 * x_config * x_config * fyy) / n ** 1.5 + 2 * fy / n ** 0.75
    return gradient, second


def sqrtn_ln_psi(x_config: np.ndarray, f2d: Function2D, sigma_sq: float) -> float:
    """Return √n·L_nΨ_f at a configuration, with L_n the generator of the particle system for the Gaussian φ of
    variance σ².

    It equals G̃_n f only for this φ; for other potentials the generator does not close on the rescaled pair.
    """
    x_config = np.asarray(x_config, dtype=float)
    n = x_config.size
    gradient, second = psi_partials(x_config, f2d, sigma_sq)
    phi = PhiModel.gaussian(sigma_sq)
    drift = interacting_drift(x_config, stable_sum(x_config), stable_sum(x_config * x_config), phi.phi_prime)
    return float(math.sqrt(n) * stable_sum(0.5 * second + drift * gradient))


class PerturbationTerms(NamedTuple):
    h: ArrayLike
    k: ArrayLike
    value: ArrayLike


def perturbation_terms(f: TestFunction, x: ArrayLike, y: ArrayLike, n: int, sigma_sq: float) -> PerturbationTerms:
    """Return H_f, K_f and F_{n,f} = f + n^{-1/4}H_f + n^{-1/2}K_f at (x, y)."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    f1 = f.d1(x)
    h = -x * y * f1 / (2 * sigma_sq)
    k = x * y * y * (3 * f1 + x * f.d2(x)) / (8 * sigma_sq ** 2)
    return PerturbationTerms(h, k, f.value(x) + h / n ** 0.25 + k / math.sqrt(n))


def remainder_sup(f: TestFunction, n: int, k: float, sigma_sq: float, grid_density: int = 101) -> float:
    """Return the maximum of |G̃_nF_{n,f} − G_σf| over a square grid restricted to the disk ‖(x, y)‖ ≤ k.

    :raises socdyn.exc.DomainError: if k ≥ σ²n^{1/4}.
    """
    if k >= sigma_sq * n ** 0.25:
        raise exc.DomainError(f'Disk radius {k} must be below σ²n^(1/4)={sigma_sq * n ** 0.25}.')
    axis = np.linspace(-k, k, grid_density)
    x, y = np.meshgrid(axis, axis)
    inside = x * x + y * y <= k * k
    x, y = x[inside], y[inside]
    remainder = g_tilde_n(Function2D.perturbation(f, n, sigma_sq), x, y, n, sigma_sq) - apply_g_sigma(f, x, sigma_sq)
    return float(np.max(np.abs(remainder)))


def stationarity_residual(f: TestFunction, sigma_sq: float) -> float:
    """Return ∫G_σf·q for the quartic law q, which vanishes for every f since q is invariant."""
    return QuarticLaw(sigma_sq).expectation(lambda s: float(apply_g_sigma(f, s, sigma_sq)))


@dataclasses.dataclass(frozen=True)
class MartingaleSeries:
    """M_{n,f}(t) = F(S̃(t), T̃(t)) − F(S̃(0), T̃(0)) − ∫₀ᵗG̃_nF ds and its predicted quadratic variation.

    :param coarse: whether the integrand varied by more than 10% of its range between two records.
    """
    times: np.ndarray
    values: np.ndarray
    quadratic_variation: np.ndarray
    coarse: bool


def martingale_residual(path: RescaledPath, f: TestFunction) -> MartingaleSeries:
    """Return the martingale of f along a path by trapezoid quadrature of the generator on the record grid."""
    n, sigma_sq = path.n, path.sigma_sq
    big_f = Function2D.perturbation(f, n, sigma_sq)
    x, y = path.s_tilde, path.t_tilde
    integrand = g_tilde_n(big_f, x, y, n, sigma_sq)
    fx, fy = big_f.dx(x, y), big_f.dy(x, y)
    quarter_n = n ** 0.25
    qv_rate = fx * fx + 4 * x / quarter_n * fx * fy + (4 * y / quarter_n + 4 * sigma_sq) * fy * fy
    value = big_f.value(x, y)
    integral = scipy.integrate.cumulative_trapezoid(integrand, path.times, initial=0.)
    spread = np.ptp(integrand) if integrand.size else 0.
    coarse = bool(spread > 0 and np.max(np.abs(np.diff(integrand))) > _COARSE_STRIDE_VARIATION * spread)
    if coarse:
        log.warning('Generator of %s varies by more than %s of its range between records of replica %s; the record '
                    'stride is too coarse for the quadrature.', big_f.name, _COARSE_STRIDE_VARIATION, path.replica)
    return MartingaleSeries(times=path.times, values=value - value[0] - integral,
                            quadratic_variation=scipy.integrate.cumulative_trapezoid(qv_rate, path.times, initial=0.),
                            coarse=coarse)


def r2_box_sup(k: float, n: int, sigma_sq: float) -> float:
    """Return the supremum of |R2| = x²h_n(y)²/(n^{3/4}σ⁴) over the box [−k, k]², attained at |x| = k, y = −k."""
    check_domain(-k, n, sigma_sq)
    return k * k * h_n(-k, n, sigma_sq) ** 2 / (n ** 0.75 * sigma_sq ** 2)


@dataclasses.dataclass(frozen=True)
class CollapsingConstants:
    """Constants of the semimartingale conditions certifying that T̃ collapses.

    The sequences are κ_n = n^{1/2}, α_n = n^{1/4} and β_n = n^{1/4}, with C₂ = 2/σ², C₃ = 0 and C₅ = 16k²(σ² + k).
    C₄ = 4σ² + 2k·sup|R2| + 4k with the supremum over the box [−k, k]² and over n ≥ n_min.

    :param k: half-width of the box.
    :param n_min: smallest number of particles the constants are used for.
    :param d: exponent d > 1 of the conditions.
    """
    k: float
    sigma_sq: float
    n_min: int
    d: float = 3.
    c4: float = dataclasses.field(init=False)

    _DOUBLINGS = 40

    def __post_init__(self):
        if not self.d > 1:
            raise exc.ContractError(f'Exponent d must exceed 1, but it is {self.d}.')
        if not self.k > 0:
            raise exc.ContractError(f'Box half-width must be positive, but it is {self.k}.')
        bound = self.sigma_sq * self.n_min ** 0.25
        if self.k >= bound:
            raise exc.DomainError(f'Box half-width {self.k} must be below σ²n^(1/4)={bound} for n={self.n_min}.')
        r2 = max(r2_box_sup(self.k, self.n_min * 2 ** i, self.sigma_sq) for i in range(self._DOUBLINGS + 1))
        object.__setattr__(self, 'c4', 4 * self.sigma_sq + 2 * self.k * r2 + 4 * self.k)

    @property
    def c2(self) -> float:
        return 2 / self.sigma_sq

    @property
    def c3(self) -> float:
        return 0.

    @property
    def c5(self) -> float:
        return 16 * self.k ** 2 * (self.sigma_sq + self.k)

    @staticmethod
    def kappa(n: int) -> float:
        return math.sqrt(n)

    @staticmethod
    def alpha(n: int) -> float:
        return n ** 0.25

    @staticmethod
    def beta(n: int) -> float:
        return n ** 0.25

    def c1_holds(self) -> bool:
        """Return whether κ_n^{1/d}/α_n → 0 and β_n/κ_n → 0, which for these power laws means d > 2."""
        return 0.5 / self.d - 0.25 < 0

    @property
    def collapse_exponent(self) -> float:
        """Return the exponent e of the bound sup T̃² ≲ n^e."""
        return 0.5 / self.d - 0.25


class Violation(NamedTuple):
    index: int
    time: float
    inequality: str
    lhs: float
    rhs: float


@dataclasses.dataclass(frozen=True)
class CollapsingReport:
    checked: int
    violations: List[Violation]
    exit_index: Optional[int]
    zeta: np.ndarray
    xi: np.ndarray
    z_sq: np.ndarray


def collapsing_inequality_check(path: RescaledPath, constants: CollapsingConstants) -> CollapsingReport:
    """Check ζ_n ≤ −κ_nC₂ξ_n + C₄ and ΣZ² ≤ C₅ at the record points of a path up to its first exit from the box.

    Here ξ_n = T̃², ζ_n = −(2√n/σ²)T̃² + 4σ² + 2T̃R2(S̃, T̃) + 4T̃/n^{1/4} and ΣZ² = 16T̃²(σ² + T̃/n^{1/4}).
    """
    n, sigma_sq, k = path.n, path.sigma_sq, constants.k
    if n < constants.n_min or sigma_sq != constants.sigma_sq:
        raise exc.ContractError(f'Constants for n ≥ {constants.n_min} and σ²={constants.sigma_sq} do not apply to a '
                                f'path of n={n} and σ²={sigma_sq}.')
    outside = (np.abs(path.s_tilde) >= k) | (np.abs(path.t_tilde) >= k)
    exit_index = int(np.argmax(outside)) if outside.any() else None
    end = len(path) if exit_index is None else exit_index
    x, y = path.s_tilde[:end], path.t_tilde[:end]
    h = h_n(y, n, sigma_sq)
    r2 = x * x * h * h / (n ** 0.75 * sigma_sq ** 2)
    quarter_n = n ** 0.25
    xi = y * y
    zeta = -(2 * math.sqrt(n) / sigma_sq) * xi + 4 * sigma_sq + 2 * y * r2 + 4 * y / quarter_n
    z_sq = 16 * xi * (sigma_sq + y / quarter_n)
    drift_bound = -constants.kappa(n) * constants.c2 * xi + constants.c4 + constants.beta(n) * constants.c3
    violations = []
    for i in range(end):
        if zeta[i] > drift_bound[i] + _CHECK_TOLERANCE * max(1., abs(drift_bound[i])):
            violations.append(Violation(i, float(path.times[i]), 'drift', float(zeta[i]), float(drift_bound[i])))
        if z_sq[i] > constants.c5 * (1 + _CHECK_TOLERANCE):
            violations.append(Violation(i, float(path.times[i]), 'quadratic variation', float(z_sq[i]), constants.c5))
    if violations:
        log.warning('Found %s violations of the collapsing conditions on replica %s.', len(violations), path.replica)
    return CollapsingReport(checked=end, violations=violations, exit_index=exit_index, zeta=zeta, xi=xi, z_sq=z_sq)
