import contextlib
import io
import json
from pathlib import Path
import tempfile
import unittest

from socdyn import cli
from socdyn.experiments import ExperimentKind


class TestCli(unittest.TestCase):

    def setUp(self):
        self._directory = tempfile.TemporaryDirectory()
        self.directory = Path(self._directory.name)

    def tearDown(self):
        self._directory.cleanup()

    def _main(self, *argv: str) -> int:
        with contextlib.redirect_stdout(io.StringIO()):
            return cli.main(list(argv))

    def test_verify_generators(self):
        out = self.directory / 'generators'
        self.assertEqual(self._main('verify-generators', '--n', '2,10', '--out', str(out)), cli.EXIT_PASSED)
        report = json.loads((out / 'report.json').read_text())
        self.assertEqual(report['config']['n'], [2, 10])
        self.assertTrue(report['pass'])

    def test_run(self):
        config = self.directory / 'a3.ini'
        out = self.directory / 'a3'
        config.write_text(f'experiment = arrow_a3\nsigma_sq = 1\ndt = 0.01\nhorizon = 1\nreplicas = 500\n'
                          f'out_dir = {out}\n')
        self.assertIn(self._main('run', str(config), '--workers', '1'), (cli.EXIT_PASSED, cli.EXIT_FAILED))
        self.assertTrue((out / 'report.json').is_file())

    def test_missing_config(self):
        self.assertEqual(self._main('run', str(self.directory / 'missing.ini')), cli.EXIT_INVALID)

    def test_invalid_config(self):
        config = self.directory / 'bad.ini'
        config.write_text('experiment = arrow_a3\n')
        self.assertEqual(self._main('run', str(config)), cli.EXIT_INVALID)

    def test_unwritable_output(self):
        blocker = self.directory / 'file'
        blocker.write_text('')
        config = self.directory / 'a3.ini'
        config.write_text(f'experiment = arrow_a3\nsigma_sq = 1\nout_dir = {blocker / "out"}\n')
        self.assertEqual(self._main('run', str(config)), cli.EXIT_INVALID)

    def test_invalid_worker_override(self):
        config = self.directory / 'a3.ini'
        config.write_text('experiment = arrow_a3\nsigma_sq = 1\n')
        self.assertEqual(self._main('run', str(config), '--workers', '0'), cli.EXIT_INVALID)

    def test_diagram_configs(self):
        args = cli._parser().parse_args(['diagram', '--sigma-sq', '2', '--out', str(self.directory), '--seed', '3',
                                         '--workers', '4'])
        configs = cli._configs(args)
        self.assertEqual([c.experiment for c in configs], [ExperimentKind.ARROW_A1, ExperimentKind.ARROW_A2,
                                                          ExperimentKind.ARROW_A3, ExperimentKind.ARROW_A4])
        self.assertEqual({(c.sigma_sq, c.seed, c.workers) for c in configs}, {(2., 3, 4)})
        self.assertEqual(configs[2].out_dir, self.directory / 'arrow_a3')

    def test_particle_count_list(self):
        with contextlib.redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit):
                cli._parser().parse_args(['verify-generators', '--n', 'two'])


if __name__ == '__main__':
    unittest.main()
