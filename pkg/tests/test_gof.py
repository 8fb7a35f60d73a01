import unittest

import numpy as np
import scipy.special
import scipy.stats

import socdyn.exc as exc
from socdyn.gof import collapsing_scaling, empirical_moments, kolmogorov_survival, ks_one_sample, ks_two_sample, \
    loglog_slope, path_extrema, symmetrize
from socdyn.particles import RescaledPath


class TestKolmogorovSurvival(unittest.TestCase):

    def test_against_scipy(self):
        for size, statistic in ((10_000, 0.01), (10_000, 0.02), (10_000, 0.05), (100, 0.12), (10, 0.35), (1000, 0.04)):
            with self.subTest(size=size, statistic=statistic):
                expected = scipy.special.kolmogorov(np.sqrt(size) * statistic)
                self.assertAlmostEqual(kolmogorov_survival(statistic, size), expected, places=10)

    def test_small_distance(self):
        self.assertEqual(kolmogorov_survival(1e-4, 100), 1.)


class TestKsOneSample(unittest.TestCase):

    def test_single_point_at_median(self):
        self.assertEqual(ks_one_sample([0.], scipy.special.ndtr).ks_statistic, 0.5)

    def test_quantiles(self):
        m = 200
        sample = scipy.special.ndtri((np.arange(1, m + 1) - 0.5) / m)
        self.assertAlmostEqual(ks_one_sample(sample, scipy.special.ndtr).ks_statistic, 0.5 / m, places=12)

    def test_against_scipy(self):
        sample = np.random.default_rng(0).standard_normal(500)
        report = ks_one_sample(sample, scipy.special.ndtr)
        self.assertAlmostEqual(report.ks_statistic, scipy.stats.kstest(sample, 'norm').statistic, places=12)
        self.assertEqual(report.sample_size, 500)
        self.assertEqual(set(report.moments), {1, 2, 3, 4})

    def test_invariant_under_increasing_map(self):
        sample = np.random.default_rng(4).standard_normal(400)
        expected = ks_one_sample(sample, scipy.special.ndtr).ks_statistic
        mapped = ks_one_sample(np.exp(sample), lambda v: scipy.special.ndtr(np.log(v))).ks_statistic
        self.assertAlmostEqual(mapped, expected, places=12)

    def test_calibration(self):
        rng = np.random.default_rng(1)
        passes = sum(ks_one_sample(rng.standard_normal(10_000), scipy.special.ndtr).p_value_approx > 0.01
                     for _ in range(100))
        self.assertGreaterEqual(passes, 96)

    def test_invalid(self):
        with self.assertRaises(exc.ContractError):
            ks_one_sample([], scipy.special.ndtr)
        with self.assertRaises(exc.ContractError):
            ks_one_sample([0., np.nan], scipy.special.ndtr)


class TestKsTwoSample(unittest.TestCase):

    def test_identical(self):
        sample = np.random.default_rng(2).standard_normal(100)
        self.assertEqual(ks_two_sample(sample, sample).ks_statistic, 0.)

    def test_disjoint(self):
        self.assertEqual(ks_two_sample(np.arange(10.), np.arange(10.) + 100).ks_statistic, 1.)
        self.assertEqual(ks_two_sample([0.], [1.]).ks_statistic, 1.)

    def test_against_scipy(self):
        rng = np.random.default_rng(3)
        a, b = rng.standard_normal(300), rng.normal(0.2, 1., 200)
        report = ks_two_sample(a, b)
        self.assertAlmostEqual(report.ks_statistic, scipy.stats.ks_2samp(a, b).statistic, places=12)
        self.assertAlmostEqual(report.sample_size, 120.)

    def test_invariant_under_increasing_map(self):
        rng = np.random.default_rng(5)
        a, b = rng.standard_normal(300), rng.normal(0.3, 1., 250)
        self.assertEqual(ks_two_sample(np.exp(a), np.exp(b)).ks_statistic, ks_two_sample(a, b).ks_statistic)

    def test_json(self):
        report = ks_two_sample([0., 1.], [0.5])
        self.assertEqual(set(report.to_json()), {'ks', 'p', 'm', 'moments'})


class TestEmpiricalMoments(unittest.TestCase):

    def test_values(self):
        moments = empirical_moments([1., -1.], [1, 2])
        self.assertEqual(moments[1].value, 0.)
        self.assertEqual(moments[2].value, 1.)
        self.assertEqual(empirical_moments([2.], [4])[4].value, 16.)

    def test_gaussian_fourth_moment(self):
        fourth = empirical_moments(np.random.default_rng(4).standard_normal(1_000_000), [4])[4]
        self.assertLess(abs(fourth.value - 3.), 3 * fourth.stderr)

    def test_symmetrized_odd_moments_vanish(self):
        moments = empirical_moments(symmetrize(np.random.default_rng(5).exponential(size=1001)), [1, 3])
        self.assertEqual(moments[1].value, 0.)
        self.assertEqual(moments[3].value, 0.)

    def test_invalid_order(self):
        with self.assertRaises(exc.ContractError):
            empirical_moments([1.], [0])


class TestPathExtrema(unittest.TestCase):

    @staticmethod
    def _path(t_tilde):
        t_tilde = np.asarray(t_tilde, dtype=float)
        times = np.arange(t_tilde.size) * 0.5
        return RescaledPath(times, np.zeros_like(t_tilde), t_tilde, seed=0, n=16, sigma_sq=1.)

    def test_constant_zero(self):
        report = path_extrema(self._path([0., 0., 0.]), 2.)
        self.assertFalse(report.exited)
        self.assertEqual(report.exit_or_infinity(), np.inf)
        self.assertEqual((report.sup_abs_s, report.sup_abs_t), (0., 0.))

    def test_exit(self):
        report = path_extrema(self._path([0., 3., 0.]), 2.)
        self.assertEqual(report.first_exit_rescaled, 0.5)
        self.assertEqual(report.sup_abs_t, 3.)

    def test_boundary_counts_as_exit(self):
        self.assertEqual(path_extrema(self._path([0., -2.]), 2.).first_exit_rescaled, 0.5)

    def test_exit_time_increases_with_k(self):
        rng = np.random.default_rng(6)
        path = self._path(np.cumsum(rng.standard_normal(500)) * 0.1)
        exits = [path_extrema(path, k).exit_or_infinity() for k in (0.1, 0.25, 0.5, 1., 2., 4., 1e6)]
        self.assertEqual(exits, sorted(exits))
        self.assertEqual(exits[-1], np.inf)

    def test_invalid_k(self):
        with self.assertRaises(exc.ContractError):
            path_extrema(self._path([0.]), 0.)


class TestScaling(unittest.TestCase):

    def test_exact_power_law(self):
        medians = {n: 3. * n ** -0.125 for n in (64, 256, 1024, 4096)}
        self.assertAlmostEqual(collapsing_scaling(medians), -0.125, places=12)
        self.assertAlmostEqual(loglog_slope([1., 10., 100.], [2., 20., 200.]), 1., places=12)

    def test_too_few_points(self):
        with self.assertRaises(exc.ContractError):
            collapsing_scaling({64: 1., 256: 0.5})


if __name__ == '__main__':
    unittest.main()
