import dataclasses
import json
from pathlib import Path
import tempfile
from typing import List
import unittest

import numpy as np

import socdyn.exc as exc
from socdyn.experiments import ExperimentConfig, ExperimentKind, ExperimentResult, load_config, run_experiment
from socdyn.report import Check, prepare_output_dir, write_columns


class _TemporaryDirectoryTestCase(unittest.TestCase):

    def setUp(self):
        self._directory = tempfile.TemporaryDirectory()
        self.directory = Path(self._directory.name)

    def tearDown(self):
        self._directory.cleanup()

    def write(self, name: str, text: str) -> Path:
        path = self.directory / name
        path.write_text(text)
        return path


class TestLoadConfig(_TemporaryDirectoryTestCase):

    def test_without_section(self):
        cfg = load_config(self.write('a.ini', 'experiment = collapsing_suite\nn = 64, 256,1024\nsigma_sq = 2\n'
                                              'seed = 5\nworkers = 3\nout_dir = results\n'))
        self.assertIs(cfg.experiment, ExperimentKind.COLLAPSING_SUITE)
        self.assertEqual(cfg.n, (64, 256, 1024))
        self.assertEqual(cfg.sigma_sq, 2.)
        self.assertEqual((cfg.seed, cfg.workers), (5, 3))
        self.assertEqual(cfg.out_dir, Path('results'))

    def test_with_section(self):
        cfg = load_config(self.write('b.ini', '[socdyn]\nexperiment = arrow_a3\nsigma_sq = 1\ndt = 0.01\n'))
        self.assertIs(cfg.experiment, ExperimentKind.ARROW_A3)
        self.assertEqual(cfg.dt, 0.01)
        self.assertEqual(cfg.get('horizon'), 50.)
        self.assertEqual(cfg.get('dt'), 0.01)

    def test_missing_variance(self):
        with self.assertRaises(exc.ConfigError) as context:
            load_config(self.write('c.ini', 'experiment = arrow_a3\n'))
        self.assertEqual(context.exception.key, 'sigma_sq')

    def test_unknown_experiment(self):
        with self.assertRaises(exc.ConfigError) as context:
            load_config(self.write('d.ini', 'experiment = arrow_a9\nsigma_sq = 1\n'))
        self.assertEqual(context.exception.key, 'experiment')

    def test_unknown_key(self):
        with self.assertRaises(exc.ConfigError) as context:
            load_config(self.write('e.ini', 'experiment = arrow_a3\nsigma_sq = 1\ntemperature = 3\n'))
        self.assertEqual(context.exception.key, 'temperature')

    def test_invalid_values(self):
        for line, key in (('replicas = many', 'replicas'), ('sigma_sq = -1', 'sigma_sq'), ('workers = 0', 'workers'),
                          ('n = 4, 0', 'n'), ('dt = 0', 'dt')):
            with self.subTest(line=line):
                text = 'experiment = arrow_a4\n' + ('' if key == 'sigma_sq' else 'sigma_sq = 1\n') + line + '\n'
                with self.assertRaises(exc.ConfigError) as context:
                    load_config(self.write('f.ini', text))
                self.assertEqual(context.exception.key, key)

    def test_missing_file(self):
        with self.assertRaises(exc.ConfigError):
            load_config(self.directory / 'missing.ini')


class TestExperimentConfig(unittest.TestCase):

    def test_required_by_experiment(self):
        cfg = ExperimentConfig(ExperimentKind.ARROW_A3, sigma_sq=1.)
        with self.assertRaises(exc.ConfigError) as context:
            cfg.get('k_box')
        self.assertEqual(context.exception.key, 'k_box')

    def test_json_excludes_execution_keys(self):
        cfg = ExperimentConfig(ExperimentKind.ARROW_A4, sigma_sq=1., workers=4, out_dir=Path('somewhere'))
        resolved = cfg.to_json()
        self.assertNotIn('workers', resolved)
        self.assertNotIn('out_dir', resolved)
        self.assertEqual(resolved['experiment'], 'arrow_a4')
        self.assertEqual(resolved['n'], [256])
        self.assertEqual(resolved['t_compare'], 5.)
        self.assertEqual(resolved, dataclasses.replace(cfg, workers=1).to_json())


class TestReport(_TemporaryDirectoryTestCase):

    def test_checks(self):
        self.assertTrue(Check.below('a', 0.01, 0.02).passed)
        self.assertFalse(Check.below('a', 0.02, 0.02).passed)
        self.assertTrue(Check.within('b', -0.5, 0.5).passed)
        self.assertEqual(Check.within('b', 1., 0.5).to_json(), {'name': 'b', 'value': 1., 'tolerance': 0.5,
                                                                 'pass': False})

    def test_unwritable_output(self):
        blocker = self.write('file', '')
        with self.assertRaises(exc.OutputError):
            prepare_output_dir(blocker / 'out')

    def test_columns_round_trip_digits(self):
        path = self.directory / 'columns.csv'
        write_columns(path, {'x': [0.1, 1 / 3]})
        self.assertEqual(path.read_text().splitlines(), ['x', '0.10000000000000001', '0.33333333333333331'])


class TestRunExperiment(_TemporaryDirectoryTestCase):

    def _limit_config(self, name: str, workers: int) -> ExperimentConfig:
        return ExperimentConfig(ExperimentKind.ARROW_A3, sigma_sq=1., dt=0.01, horizon=2., replicas=2000, seed=9,
                                workers=workers, out_dir=self.directory / name)

    def test_unwritable_output_before_compute(self):
        cfg = dataclasses.replace(self._limit_config('unused', 1), out_dir=self.write('file', '') / 'out')
        with self.assertRaises(exc.OutputError):
            run_experiment(cfg)

    def test_report(self):
        result = run_experiment(self._limit_config('a3', 1))
        report = json.loads(result.report_path.read_text())
        self.assertEqual(report['experiment'], 'arrow_a3')
        self.assertEqual(report['seed'], 9)
        self.assertEqual(report['config']['replicas'], 2000)
        self.assertNotIn('workers', report['config'])
        self.assertIn('source_revision', report)
        self.assertEqual([c['name'] for c in report['checks']], ['ks_limit_vs_quartic',
                                                                 'second_moment_standard_errors'])
        self.assertEqual(report['pass'], result.passed)
        for name in ('limit_terminal.csv', 'gof.json', 'histogram.csv', 'quartic_law.csv'):
            self.assertTrue((self.directory / 'a3' / name).is_file())

    def test_byte_identical_across_runs_and_workers(self):
        outputs = [run_experiment(self._limit_config(name, workers)).report_path.parent
                   for name, workers in (('first', 1), ('second', 1), ('parallel', 2))]
        for name in ('report.json', 'limit_terminal.csv', 'gof.json'):
            contents = {(out / name).read_bytes() for out in outputs}
            self.assertEqual(len(contents), 1, name)

    def test_generator_suite(self):
        cfg = ExperimentConfig(ExperimentKind.GENERATOR_SUITE, sigma_sq=1., n=(2, 10), replicas=5,
                               out_dir=self.directory / 'generators')
        result = run_experiment(cfg)
        failed = [c.name for c in result.checks if not c.passed]
        self.assertEqual(failed, [])
        self.assertTrue((self.directory / 'generators' / 'generator_report.json').is_file())


class TestRunners(_TemporaryDirectoryTestCase):
    """Each experiment at a tiny size: its check names and artifacts, not its statistical verdict."""

    def _run(self, kind: ExperimentKind, **kwargs) -> ExperimentResult:
        result = run_experiment(ExperimentConfig(kind, sigma_sq=1., seed=4, out_dir=self.directory / kind.value,
                                                 **kwargs))
        report = json.loads(result.report_path.read_text())
        self.assertEqual(report['experiment'], kind.value)
        self.assertEqual([c['name'] for c in report['checks']], [c.name for c in result.checks])
        return result

    def _assert_artifacts(self, kind: ExperimentKind, *names: str):
        for name in names:
            self.assertTrue((self.directory / kind.value / name).is_file(), name)

    def _assert_checks(self, result: ExperimentResult, names: List[str]):
        self.assertEqual([c.name for c in result.checks], names)
        for check in result.checks:
            self.assertTrue(np.isfinite(check.value), check.name)

    def test_arrow_a1(self):
        kind = ExperimentKind.ARROW_A1
        result = self._run(kind, n=(8,), dt=0.05, horizon=1., replicas=20, chains=4, samples=40, burn_in=100)
        self._assert_checks(result, ['ks_system_vs_equilibrium'])
        self._assert_artifacts(kind, 'system_terminal.csv', 'equilibrium.csv', 'diagnostics.json', 'gof.json')

    def test_arrow_a2(self):
        kind = ExperimentKind.ARROW_A2
        result = self._run(kind, n=(8,), chains=4, samples=40, burn_in=100)
        self._assert_checks(result, ['ks_equilibrium_vs_quartic', 'moment_1_vs_importance_standard_errors[n=4]',
                                     'moment_2_vs_importance_standard_errors[n=4]'])
        self._assert_artifacts(kind, 'equilibrium.csv', 'diagnostics.json', 'gof.json', 'cross_check.json',
                               'histogram.csv')
        cross = json.loads((self.directory / kind.value / 'cross_check.json').read_text())
        self.assertEqual(cross['n'], 4)
        self.assertEqual(set(cross['moments']), {'1', '2'})

    def test_arrow_a4(self):
        kind = ExperimentKind.ARROW_A4
        result = self._run(kind, n=(8,), dt=0.05, t_compare=1., replicas=20, limit_replicas=200)
        self._assert_checks(result, ['ks_system_vs_limit'])
        self._assert_artifacts(kind, 'system_marginal.csv', 'limit_marginal.csv', 'gof.json')

    def test_collapsing_suite(self):
        kind = ExperimentKind.COLLAPSING_SUITE
        result = self._run(kind, n=(64, 128, 256), k_box=1.5, dt=0.05, horizon=0.2, replicas=4)
        self._assert_checks(result, ['medians_decreasing', 'collapsing_slope', 'collapsing_violations'])
        self._assert_artifacts(kind, 'collapsing.csv', 'collapsing.json')
        summary = json.loads((self.directory / kind.value / 'collapsing.json').read_text())
        self.assertEqual(set(summary['medians']), {'64', '128', '256'})

    def test_martingale_suite(self):
        kind = ExperimentKind.MARTINGALE_SUITE
        result = self._run(kind, n=(8, 16), dt=0.05, horizon=0.5, replicas=20)
        self._assert_checks(result, ['martingale_mean_standard_errors[n=8]', 'martingale_mean_standard_errors[n=16]',
                                     'martingale_variance_ratio'])
        self._assert_artifacts(kind, 'martingale.csv')

    def test_discretization_suite(self):
        kind = ExperimentKind.DISCRETIZATION_SUITE
        result = self._run(kind, n=(8,), dt=0.05, horizon=1., replicas=50, t_compare=1., limit_replicas=100)
        self._assert_checks(result, ['ks_change_on_halving_dt[arrow_a3]', 'ks_change_on_halving_dt[arrow_a4]'])
        self._assert_artifacts(kind, 'discretization.json')

    def test_general_rho(self):
        kind = ExperimentKind.GENERAL_RHO
        result = self._run(kind, n=(8,), chains=4, samples=40, burn_in=100, quartic=0.125)
        self._assert_checks(result, ['ks_equilibrium_vs_general_quartic'])
        self._assert_artifacts(kind, 'equilibrium.csv', 'diagnostics.json', 'gof.json', 'rho.json', 'histogram.csv')
        rho = json.loads((self.directory / kind.value / 'rho.json').read_text())
        self.assertLess(rho['variance'], 1.)
        self.assertLess(rho['mu4'], 3 * rho['variance'] ** 2)

    def test_worker_independence(self):
        cases = ((ExperimentKind.ARROW_A4, dict(n=(8,), dt=0.05, t_compare=1., replicas=130, limit_replicas=2100),
                  ('report.json', 'gof.json', 'system_marginal.csv', 'limit_marginal.csv')),
                 (ExperimentKind.ARROW_A2, dict(n=(8,), chains=130, samples=260, burn_in=100),
                  ('report.json', 'gof.json', 'cross_check.json', 'equilibrium.csv')))
        for kind, kwargs, names in cases:
            with self.subTest(experiment=kind.value):
                outputs = []
                for workers in (1, 4):
                    out = self.directory / f'{kind.value}-{workers}'
                    run_experiment(ExperimentConfig(kind, sigma_sq=1., seed=11, workers=workers, out_dir=out, **kwargs))
                    outputs.append(out)
                for name in names:
                    self.assertEqual((outputs[0] / name).read_bytes(), (outputs[1] / name).read_bytes(), name)


if __name__ == '__main__':
    unittest.main()
