"""Seeded experiments reproducing the convergence diagram of the model and verifying the generator calculus."""

import configparser
import dataclasses
import enum
import logging
import math
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np

import socdyn.config as config
import socdyn.exc as exc
from socdyn.generator import (apply_g_sigma, collapsing_inequality_check, CollapsingConstants, Function2D,
                              g_tilde_n, g_tilde_n_parts, martingale_residual, observables, psi_partials, psi_value,
                              remainder_sup, sqrtn_ln_psi, stationarity_residual, TestFunction)
from socdyn.gof import collapsing_scaling, empirical_moments, GofReport, ks_one_sample, ks_two_sample, loglog_slope, \
    path_extrema
from socdyn.limit import LimitRunConfig, QuarticLaw, simulate_limit
from socdyn.model import grad_log_density_star, log_density_star, PhiModel, StarDensity
from socdyn.particles import SdeRunConfig, simulate_replicas
from socdyn.report import Check, PathLike, prepare_output_dir, source_revision, write_columns, write_json
from socdyn.sampler import importance_moments, MalaConfig, sample_equilibrium
from socdyn.util import Purpose, StreamFactory

log = logging.getLogger(__name__)

_SECTION = 'socdyn'


class ExperimentKind(enum.Enum):
    ARROW_A1 = 'arrow_a1'
    ARROW_A2 = 'arrow_a2'
    ARROW_A3 = 'arrow_a3'
    ARROW_A4 = 'arrow_a4'
    GENERATOR_SUITE = 'generator_suite'
    COLLAPSING_SUITE = 'collapsing_suite'
    MARTINGALE_SUITE = 'martingale_suite'
    DISCRETIZATION_SUITE = 'discretization_suite'
    GENERAL_RHO = 'general_rho'


_DEFAULTS: Dict[ExperimentKind, Dict[str, Any]] = {
    ExperimentKind.ARROW_A1: dict(n=(64,), dt=0.01, horizon=20., replicas=500, chains=100, samples=10_000,
                                  burn_in=1000),
    ExperimentKind.ARROW_A2: dict(n=(512,), chains=100, samples=10_000, burn_in=2000),
    ExperimentKind.ARROW_A3: dict(dt=0.005, horizon=50., replicas=10_000),
    ExperimentKind.ARROW_A4: dict(n=(256,), dt=0.01, t_compare=config.A4_COMPARISON_TIME, replicas=500,
                                  limit_replicas=10_000),
    ExperimentKind.GENERATOR_SUITE: dict(n=(2, 10, 100), replicas=100, k_box=1.),
    ExperimentKind.COLLAPSING_SUITE: dict(n=(64, 256, 1024), dt=0.01, horizon=2., replicas=200, k_box=2.),
    ExperimentKind.MARTINGALE_SUITE: dict(n=(64, 256), dt=0.01, horizon=1., replicas=1000),
    ExperimentKind.DISCRETIZATION_SUITE: dict(n=(256,)),
    ExperimentKind.GENERAL_RHO: dict(n=(512,), chains=100, samples=10_000, burn_in=2000, quartic=0.125),
}
_INT_KEYS = ('replicas', 'seed', 'workers', 'chains', 'thinning', 'burn_in', 'samples', 'limit_replicas')
_FLOAT_KEYS = ('sigma_sq', 'dt', 'horizon', 'k_box', 't_compare', 'quartic')
_EXECUTION_KEYS = ('workers', 'out_dir')  # Keys which do not affect results.


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """Resolved configuration of an experiment.

    Unset optional parameters take the defaults of the experiment kind, see :meth:`get`.
    """
    experiment: ExperimentKind
    sigma_sq: float
    n: Tuple[int, ...] = ()
    dt: Optional[float] = None
    horizon: Optional[float] = None
    replicas: Optional[int] = None
    seed: int = 0
    workers: int = 1
    out_dir: Path = Path('socdyn-out')
    k_box: Optional[float] = None
    chains: Optional[int] = None
    thinning: Optional[int] = None
    burn_in: Optional[int] = None
    samples: Optional[int] = None
    t_compare: Optional[float] = None
    limit_replicas: Optional[int] = None
    quartic: Optional[float] = None

    def __post_init__(self):
        if not self.sigma_sq > 0:
            raise exc.ConfigError(f'Variance must be positive, but it is {self.sigma_sq}.', key='sigma_sq')
        if any(n < 1 for n in self.n):
            raise exc.ConfigError(f'Numbers of particles must be positive, but they are {self.n}.', key='n')
        if self.workers < 1:
            raise exc.ConfigError(f'Number of workers must be positive, but it is {self.workers}.', key='workers')
        if not 0 <= self.seed < 1 << 64:
            raise exc.ConfigError(f'Seed must be a 64-bit unsigned integer, but it is {self.seed}.', key='seed')
        for key in _INT_KEYS + _FLOAT_KEYS:
            value = getattr(self, key)
            if key != 'seed' and value is not None and not value > 0:
                raise exc.ConfigError(f'Value of {key} must be positive, but it is {value}.', key=key)

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, str]) -> 'ExperimentConfig':
        """Parse string values as read from a configuration file."""
        known = {f.name for f in dataclasses.fields(cls)}
        for key in mapping:
            if key not in known:
                raise exc.ConfigError(f'Configuration key "{key}" is unknown.', key=key)
        for key in ('experiment', 'sigma_sq'):
            if key not in mapping:
                raise exc.ConfigError(f'Configuration key "{key}" is required.', key=key)
        try:
            kind = ExperimentKind(mapping['experiment'].strip())
        except ValueError:
            names = ', '.join(k.value for k in ExperimentKind)
            raise exc.ConfigError(f'Experiment "{mapping["experiment"]}" is unknown. Known experiments are: {names}.',
                                  key='experiment') from None
        values: Dict[str, Any] = {'experiment': kind}
        for key, text in mapping.items():
            text = text.strip()
            try:
                if key == 'n':
                    values[key] = tuple(int(v) for v in text.split(',') if v.strip())
                elif key == 'out_dir':
                    values[key] = Path(text)
                elif key in _INT_KEYS:
                    values[key] = int(text)
                elif key in _FLOAT_KEYS:
                    values[key] = float(text)
            except ValueError:
                raise exc.ConfigError(f'Value "{text}" of configuration key "{key}" is invalid.', key=key) from None
        return cls(**values)

    def get(self, key: str) -> Any:
        value = getattr(self, key)
        if value is None or value == ():
            value = _DEFAULTS[self.experiment].get(key)
        if value is None:
            raise exc.ConfigError(f'Configuration key "{key}" is required by experiment {self.experiment.value}.',
                                  key=key)
        return value

    def to_json(self) -> Dict[str, Any]:
        resolved = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        for key, value in _DEFAULTS[self.experiment].items():
            if resolved[key] is None or resolved[key] == ():
                resolved[key] = value
        resolved.update(experiment=self.experiment.value, n=list(resolved['n']))
        for key in _EXECUTION_KEYS:
            del resolved[key]
        return resolved


def load_config(path: PathLike) -> ExperimentConfig:
    """Read a flat key-value configuration file. The section header is optional."""
    try:
        text = Path(path).read_text()
    except OSError as error:
        raise exc.ConfigError(f'Configuration file {path} cannot be read: {error}', key='config') from error
    if not text.lstrip().startswith('['):
        text = f'[{_SECTION}]\n{text}'
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as error:
        raise exc.ConfigError(f'Configuration file {path} is malformed: {error}', key='config') from error
    sections = parser.sections()
    if len(sections) != 1:
        raise exc.ConfigError(f'Configuration file {path} must have a single section, but it has {sections}.',
                              key='config')
    return ExperimentConfig.from_mapping(dict(parser[sections[0]]))


@dataclasses.dataclass(frozen=True)
class ExperimentResult:
    experiment: ExperimentKind
    checks: List[Check]
    report_path: Path

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _ks_check(name: str, report: GofReport, tolerance: float) -> Check:
    return Check.below(name, report.ks_statistic, tolerance)


def _write_histogram(path: Path, sample: np.ndarray, bins: int = 60) -> None:
    density, edges = np.histogram(sample, bins=bins, density=True)
    write_columns(path, {'s': (edges[:-1] + edges[1:]) / 2, 'density': density})


def _system_terminal(cfg: ExperimentConfig, n: int, horizon: float, dt: float, replicas: int) -> np.ndarray:
    stride = max(1, math.floor(math.sqrt(n) * horizon / dt))
    run = SdeRunConfig(n=n, phi=PhiModel.gaussian(cfg.sigma_sq), horizon_rescaled=horizon, dt_natural=dt,
                       record_stride=stride, seed=cfg.seed)
    return np.array([p.s_tilde[-1] for p in simulate_replicas(run, replicas, cfg.workers)])


def _mala_config(cfg: ExperimentConfig, n: int, phi: Optional[PhiModel] = None) -> MalaConfig:
    model = StarDensity(phi if phi is not None else PhiModel.gaussian(cfg.sigma_sq), n)
    chains = cfg.get('chains')
    chain_length = max(1, math.ceil(cfg.get('samples') / chains))
    default = MalaConfig(model, chain_length=chain_length)
    thinning = cfg.thinning or max(1, math.ceil(math.sqrt(n) / (2 * default.resolved_step_size)))
    return MalaConfig(model, chain_length=chain_length, burn_in=cfg.get('burn_in'), thinning=thinning, seed=cfg.seed,
                      chains=chains)


def _arrow_a1(cfg: ExperimentConfig, out: Path) -> List[Check]:
    n = cfg.get('n')[0]
    terminal = _system_terminal(cfg, n, cfg.get('horizon'), cfg.get('dt'), cfg.get('replicas'))
    equilibrium = sample_equilibrium(_mala_config(cfg, n), cfg.workers)
    report = ks_two_sample(terminal, equilibrium.samples)
    write_columns(out / 'system_terminal.csv', {'s_tilde': terminal})
    equilibrium.to_csv(out / 'equilibrium.csv')
    equilibrium.diagnostics_to_json(out / 'diagnostics.json')
    write_json(out / 'gof.json', report.to_json())
    return [_ks_check('ks_system_vs_equilibrium', report, 0.08)]


def _moment_cross_check(cfg: ExperimentConfig) -> Tuple[List[Check], Dict[str, Any]]:
    n = config.CROSS_CHECK_PARTICLES
    mcmc = sample_equilibrium(_mala_config(cfg, n), cfg.workers)
    oracle = importance_moments(StarDensity(PhiModel.gaussian(cfg.sigma_sq), n), (1, 2), seed=cfg.seed)
    checks, rows = [], {}
    for k in (1, 2):
        chain, reference = mcmc.moment(k), oracle[k]
        combined = math.hypot(chain.stderr, reference.stderr)
        checks.append(Check.within(f'moment_{k}_vs_importance_standard_errors[n={n}]',
                                   (chain.value - reference.value) / combined, 3.))
        rows[str(k)] = {'mcmc': chain.value, 'mcmc_stderr': chain.stderr, 'importance': reference.value,
                        'importance_stderr': reference.stderr}
    return checks, {'n': n, 'draws': config.IMPORTANCE_DRAWS, 'moments': rows}


def _arrow_a2(cfg: ExperimentConfig, out: Path) -> List[Check]:
    n = cfg.get('n')[0]
    equilibrium = sample_equilibrium(_mala_config(cfg, n), cfg.workers)
    law = QuarticLaw(cfg.sigma_sq)
    report = ks_one_sample(equilibrium.samples, law.cdf)
    cross_checks, cross_report = _moment_cross_check(cfg)
    equilibrium.to_csv(out / 'equilibrium.csv')
    equilibrium.diagnostics_to_json(out / 'diagnostics.json')
    write_json(out / 'gof.json', report.to_json())
    write_json(out / 'cross_check.json', cross_report)
    _write_histogram(out / 'histogram.csv', equilibrium.samples)
    return [_ks_check('ks_equilibrium_vs_quartic', report, 0.05)] + cross_checks


def _general_rho(cfg: ExperimentConfig, out: Path) -> List[Check]:
    n = cfg.get('n')[0]
    phi = PhiModel.quartic(cfg.sigma_sq, cfg.get('quartic'))
    variance, mu4 = phi.moment(2), phi.moment(4)
    law = QuarticLaw.from_moments(variance, mu4)
    equilibrium = sample_equilibrium(_mala_config(cfg, n, phi), cfg.workers)
    report = ks_one_sample(equilibrium.samples, law.cdf)
    equilibrium.to_csv(out / 'equilibrium.csv')
    equilibrium.diagnostics_to_json(out / 'diagnostics.json')
    write_json(out / 'gof.json', report.to_json())
    write_json(out / 'rho.json', {'variance': variance, 'mu4': mu4, 'quartic_coefficient': law.quartic_coefficient})
    _write_histogram(out / 'histogram.csv', equilibrium.samples)
    return [_ks_check('ks_equilibrium_vs_general_quartic', report, 0.05)]


def _limit_ks(cfg: ExperimentConfig, dt: float) -> Tuple[np.ndarray, GofReport]:
    run = LimitRunConfig(cfg.sigma_sq, dt, cfg.get('horizon'), cfg.get('replicas'), seed=cfg.seed)
    terminal = simulate_limit(run, cfg.workers).terminal
    return terminal, ks_one_sample(terminal, QuarticLaw(cfg.sigma_sq).cdf)


def _arrow_a3(cfg: ExperimentConfig, out: Path) -> List[Check]:
    law = QuarticLaw(cfg.sigma_sq)
    terminal, report = _limit_ks(cfg, cfg.get('dt'))
    second = empirical_moments(terminal, [2])[2]
    deviation = (second.value - law.closed_form_moment(2)) / second.stderr
    write_columns(out / 'limit_terminal.csv', {'u_T': terminal})
    write_json(out / 'gof.json', report.to_json())
    _write_histogram(out / 'histogram.csv', terminal)
    grid = np.linspace(-4 * law.scale, 4 * law.scale, 401)
    write_columns(out / 'quartic_law.csv', {'s': grid, 'pdf': law.pdf(grid), 'cdf': law.cdf(grid)})
    return [_ks_check('ks_limit_vs_quartic', report, 0.02),
            Check.within('second_moment_standard_errors', deviation, 3.)]


def _arrow_a4_ks(cfg: ExperimentConfig, dt: float) -> Tuple[np.ndarray, np.ndarray, GofReport]:
    n, t = cfg.get('n')[0], cfg.get('t_compare')
    system = _system_terminal(cfg, n, t, dt, cfg.get('replicas'))
    limit = simulate_limit(LimitRunConfig(cfg.sigma_sq, dt, t, cfg.get('limit_replicas'), seed=cfg.seed),
                           cfg.workers).terminal
    return system, limit, ks_two_sample(system, limit)


def _arrow_a4(cfg: ExperimentConfig, out: Path) -> List[Check]:
    system, limit, report = _arrow_a4_ks(cfg, cfg.get('dt'))
    write_columns(out / 'system_marginal.csv', {'s_tilde': system})
    write_columns(out / 'limit_marginal.csv', {'u_T': limit})
    write_json(out / 'gof.json', report.to_json())
    return [_ks_check('ks_system_vs_limit', report, 0.08)]


_IDENTITY_FUNCTIONS = (
    lambda: Function2D.of_x(TestFunction.monomial(1)),
    lambda: Function2D.of_x(TestFunction.monomial(2)),
    lambda: Function2D.of_x(TestFunction.monomial(3)),
    lambda: Function2D.of_x(TestFunction.sine()),
    lambda: Function2D.monomial(0, 1),
    lambda: Function2D.monomial(1, 1),
    lambda: Function2D.monomial(0, 2),
)


def _central_difference_deviation(func: Callable[[np.ndarray], float], x: np.ndarray, gradient: np.ndarray,
                                  second: Optional[np.ndarray], step: float = 1e-4) -> float:
    worst = 0.
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = step
        up, mid, down = func(x + e), func(x), func(x - e)
        estimates = [((up - down) / (2 * step), gradient[j])]
        if second is not None:
            estimates.append(((up - 2 * mid + down) / step ** 2, second[j]))
        for estimate, exact in estimates:
            worst = max(worst, abs(estimate - exact) / max(1., abs(exact)))
    return worst


def _generator_suite(cfg: ExperimentConfig, out: Path) -> List[Check]:
    checks: List[Check] = []
    identities = []
    points = cfg.get('replicas')
    rng = StreamFactory(cfg.seed).generator(Purpose.PROBE)
    for n in cfg.get('n'):
        for sigma_sq in (cfg.sigma_sq / 2, cfg.sigma_sq, 2 * cfg.sigma_sq):
            configurations = rng.normal(0., math.sqrt(sigma_sq), (points, n))
            for make in _IDENTITY_FUNCTIONS:
                f2d = make()
                identity, expansion = 0., 0.
                for x_config in configurations:
                    s, t = observables(x_config, sigma_sq)
                    generator = float(g_tilde_n(f2d, s, t, n, sigma_sq))
                    identity = max(identity, abs(sqrtn_ln_psi(x_config, f2d, sigma_sq) - generator))
                    parts = g_tilde_n_parts(f2d, s, t, n, sigma_sq)
                    expansion = max(expansion, abs(parts.truncated + parts.remainder - parts.exact))
                name = f'[{f2d.name}, n={n}, sigma_sq={sigma_sq}]'
                identities.append({'function': f2d.name, 'n': n, 'sigma_sq': sigma_sq, 'points': points,
                                   'max_abs_deviation': identity})
                checks.append(Check.below(f'sqrtn_ln_psi_vs_g_tilde_n{name}', identity, 1e-8))
                checks.append(Check.below(f'truncated_plus_remainder{name}', expansion, 1e-8))
            x_config = configurations[0]
            for make in _IDENTITY_FUNCTIONS:
                f2d = make()
                gradient, second = psi_partials(x_config, f2d, sigma_sq)
                deviation = _central_difference_deviation(lambda v: float(psi_value(v, f2d, sigma_sq)), x_config,
                                                          gradient, second)
                checks.append(Check.below(f'psi_partials_vs_differences[{f2d.name}, n={n}, sigma_sq={sigma_sq}]',
                                          deviation, 1e-5))
            model = StarDensity(PhiModel.gaussian(sigma_sq), n)
            deviation = _central_difference_deviation(lambda v: float(log_density_star(v, model)), x_config,
                                                      grad_log_density_star(x_config, model), None)
            checks.append(Check.below(f'grad_log_density_vs_differences[n={n}, sigma_sq={sigma_sq}]', deviation, 1e-5))

    k = cfg.get('k_box')
    ns = (16, 64, 256, 1024, 4096)
    remainders = {}
    for f in (TestFunction.monomial(1), TestFunction.monomial(2)):
        sups = [remainder_sup(f, n, k, cfg.sigma_sq) for n in ns]
        remainders[f.name] = dict(zip(ns, sups))
        checks.append(Check.below(f'remainder_sup_ratio[{f.name}]', sups[-1] / sups[0], 1.))
    slope = loglog_slope(ns, list(remainders['x^2'].values()))
    checks.append(Check('remainder_sup_slope[x^2]', slope, -0.2, bool(np.isfinite(slope) and slope <= -0.2)))
    for degree in range(5):
        residual = stationarity_residual(TestFunction.monomial(degree), cfg.sigma_sq)
        checks.append(Check.within(f'stationarity_residual[x^{degree}]', residual, 1e-8))
    grid = np.linspace(-2., 2., 81)
    leading = apply_g_sigma(TestFunction.monomial(2), grid, cfg.sigma_sq) - (1 - grid ** 4 / cfg.sigma_sq ** 2)
    checks.append(Check.below('g_sigma_of_square', float(np.max(np.abs(leading))), 1e-12))

    law = QuarticLaw(cfg.sigma_sq)
    checks.append(Check.within('quartic_mass', law.mass() - 1, 1e-10))
    checks.append(Check.within('quartic_cdf_at_zero', law.cdf(0.) - 0.5, 1e-12))
    checks.append(Check.within('quartic_second_moment_scaling', law.moment(2) - law.closed_form_moment(2), 1e-10))
    write_json(out / 'generator_report.json', {'identities': identities, 'remainder_sup': remainders,
                                               'remainder_grid': {'k': k, 'density': 101, 'n': list(ns)}})
    return checks


def _collapsing_suite(cfg: ExperimentConfig, out: Path) -> List[Check]:
    ns, k = sorted(cfg.get('n')), cfg.get('k_box')
    constants = CollapsingConstants(k, cfg.sigma_sq, n_min=ns[0])
    medians, violations, c2_estimates = {}, 0, {}
    for n in ns:
        run = SdeRunConfig(n=n, phi=PhiModel.gaussian(cfg.sigma_sq), horizon_rescaled=cfg.get('horizon'),
                           dt_natural=cfg.get('dt'), seed=cfg.seed)
        paths = simulate_replicas(run, cfg.get('replicas'), cfg.workers)
        medians[n] = float(np.median([path_extrema(p, k).sup_abs_t for p in paths]))
        violations += sum(len(collapsing_inequality_check(p, constants).violations) for p in paths)
        c2_estimates[n] = float(n ** (constants.d / 4) * np.mean([p.t_tilde[0] ** (2 * constants.d) for p in paths]))
        log.info('Median of sup|T̃| for n=%s is %s.', n, medians[n])
    slope = collapsing_scaling(medians)
    ratios = [medians[b] / medians[a] for a, b in zip(ns, ns[1:])]
    write_columns(out / 'collapsing.csv', {'n': ns, 'median_sup_abs_t_tilde': [medians[n] for n in ns]})
    write_json(out / 'collapsing.json', {'medians': {str(n): m for n, m in medians.items()}, 'slope': slope,
                                         'predicted_sup_exponent': constants.collapse_exponent / 2,
                                         'c1_holds': constants.c1_holds(), 'c2_estimates': c2_estimates,
                                         'c4': constants.c4, 'c5': constants.c5, 'violations': violations})
    return [Check.below('medians_decreasing', max(ratios), 1.), Check.below('collapsing_slope', slope, -0.05),
            Check.within('collapsing_violations', violations, 0.)]


def _martingale_suite(cfg: ExperimentConfig, out: Path) -> List[Check]:
    f = TestFunction.monomial(1)
    checks, variances, rows = [], {}, []
    for n in cfg.get('n'):
        run = SdeRunConfig(n=n, phi=PhiModel.gaussian(cfg.sigma_sq), horizon_rescaled=cfg.get('horizon'),
                           dt_natural=cfg.get('dt'), seed=cfg.seed)
        series = [martingale_residual(p, f) for p in simulate_replicas(run, cfg.get('replicas'), cfg.workers)]
        terminal = np.array([s.values[-1] for s in series])
        predicted = float(np.mean([s.quadratic_variation[-1] for s in series]))
        mean = empirical_moments(terminal, [1])[1]
        variances[n] = float(np.var(terminal))
        rows.append((n, mean.value, mean.stderr, variances[n], predicted))
        checks.append(Check.within(f'martingale_mean_standard_errors[n={n}]', mean.value / mean.stderr, 3.))
    spread = max(variances.values()) / min(variances.values())
    checks.append(Check.below('martingale_variance_ratio', spread, 3.))
    n_col, mean_col, stderr_col, var_col, qv_col = zip(*rows)
    write_columns(out / 'martingale.csv', {'n': n_col, 'mean': mean_col, 'stderr': stderr_col, 'variance': var_col,
                                           'mean_quadratic_variation': qv_col})
    return checks


def _discretization_suite(cfg: ExperimentConfig, out: Path) -> List[Check]:
    a3 = dataclasses.replace(cfg, experiment=ExperimentKind.ARROW_A3, n=())
    a4 = dataclasses.replace(cfg, experiment=ExperimentKind.ARROW_A4)
    rows = {}
    dt = a3.get('dt')
    rows['arrow_a3'] = (dt, _limit_ks(a3, dt)[1].ks_statistic, _limit_ks(a3, dt / 2)[1].ks_statistic)
    dt = a4.get('dt')
    rows['arrow_a4'] = (dt, _arrow_a4_ks(a4, dt)[2].ks_statistic, _arrow_a4_ks(a4, dt / 2)[2].ks_statistic)
    write_json(out / 'discretization.json', {k: {'dt': v[0], 'ks': v[1], 'ks_half_dt': v[2]} for k, v in rows.items()})
    return [Check.below(f'ks_change_on_halving_dt[{k}]', abs(v[1] - v[2]), 0.02) for k, v in rows.items()]


_RUNNERS: Dict[ExperimentKind, Callable[[ExperimentConfig, Path], List[Check]]] = {
    ExperimentKind.ARROW_A1: _arrow_a1,
    ExperimentKind.ARROW_A2: _arrow_a2,
    ExperimentKind.ARROW_A3: _arrow_a3,
    ExperimentKind.ARROW_A4: _arrow_a4,
    ExperimentKind.GENERATOR_SUITE: _generator_suite,
    ExperimentKind.COLLAPSING_SUITE: _collapsing_suite,
    ExperimentKind.MARTINGALE_SUITE: _martingale_suite,
    ExperimentKind.DISCRETIZATION_SUITE: _discretization_suite,
    ExperimentKind.GENERAL_RHO: _general_rho,
}
assert set(_RUNNERS) == set(ExperimentKind)


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run an experiment, write its artifacts and its ``report.json`` to the output directory, and return its checks.

    :raises socdyn.exc.OutputError: if the output directory is not writable. This is checked before any computation.
    """
    out = prepare_output_dir(cfg.out_dir)
    log.info('Running experiment %s with seed %s into %s.', cfg.experiment.value, cfg.seed, out)
    checks = _RUNNERS[cfg.experiment](cfg, out)
    report_path = out / 'report.json'
    result = ExperimentResult(cfg.experiment, checks, report_path)
    write_json(report_path, {'experiment': cfg.experiment.value, 'config': cfg.to_json(), 'seed': cfg.seed,
                             'source_revision': source_revision(), 'checks': [c.to_json() for c in checks],
                             'pass': result.passed})
    failed = [c.name for c in checks if not c.passed]
    if failed:
        log.warning('Experiment %s failed %s of %s checks: %s', cfg.experiment.value, len(failed), len(checks),
                    ', '.join(failed))
    else:
        log.info('Experiment %s passed all %s checks.', cfg.experiment.value, len(checks))
    return result
