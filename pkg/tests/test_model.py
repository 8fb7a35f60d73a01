import unittest

import numpy as np

import socdyn.exc as exc
from socdyn.model import (confinement_diagnostics, drift_vector, grad_log_density_star, interacting_drift,
                          log_density_star, ParticleState, PhiKind, PhiModel, stable_sum, StarDensity, validate_phi)

_GRID = np.linspace(-5., 5., 201)


def _quartic_phi(x):
    return -x ** 4 / 4


def _quartic_phi_prime(x):
    return -x ** 3


class TestPhiModel(unittest.TestCase):

    def test_gaussian(self):
        phi = PhiModel.gaussian(2.)
        self.assertIs(phi.kind, PhiKind.GAUSSIAN)
        self.assertAlmostEqual(phi.phi(2.), -0.5)
        self.assertAlmostEqual(phi.phi_prime(2.), -0.5)
        self.assertEqual(phi.variance, 2.)
        self.assertEqual(phi.moment(4), 12.)
        self.assertEqual(phi.moment(3), 0.)

    def test_nonpositive_variance(self):
        with self.assertRaises(exc.ContractError):
            PhiModel.gaussian(0.)

    def test_quartic(self):
        flat = PhiModel.quartic(1.5, 0.)
        self.assertIs(flat.kind, PhiKind.QUARTIC)
        self.assertAlmostEqual(flat.variance, 1.5, places=7)
        self.assertAlmostEqual(flat.moment(4), 3 * 1.5 ** 2, places=6)
        phi = PhiModel.quartic(1., 0.125)
        self.assertAlmostEqual(phi.phi(2.), -1. - 2.)
        self.assertAlmostEqual(phi.phi_prime(2.), -1. - 4.)
        self.assertLess(phi.variance, 1.)
        self.assertLess(phi.moment(4), 3 * phi.variance ** 2)
        self.assertEqual(phi.moment(3), 0.)
        self.assertTrue(validate_phi(phi, _GRID).passed)

    def test_invalid_quartic(self):
        for sigma_sq, quartic in ((0., 0.1), (1., -0.1)):
            with self.subTest(sigma_sq=sigma_sq, quartic=quartic):
                with self.assertRaises(exc.ContractError):
                    PhiModel.quartic(sigma_sq, quartic)

    def test_custom_moments_match_gaussian(self):
        gaussian = PhiModel.gaussian(1.5)
        custom = PhiModel.custom(gaussian.phi, gaussian.phi_prime, 1.)
        self.assertAlmostEqual(custom.variance, 1.5, places=7)
        self.assertAlmostEqual(custom.moment(4), 3 * 1.5 ** 2, places=6)


class TestValidatePhi(unittest.TestCase):

    def test_gaussian_passes(self):
        report = validate_phi(PhiModel.gaussian(1.), _GRID)
        self.assertTrue(report.passed)
        self.assertIsNone(report.violation)

    def test_quartic_passes(self):
        self.assertTrue(validate_phi(PhiModel.custom(_quartic_phi, _quartic_phi_prime, 1.), _GRID).passed)

    def test_divergent_fails(self):
        report = validate_phi(PhiModel.custom(lambda x: x * x, lambda x: 2 * x, 3.), _GRID)
        self.assertFalse(report.passed)
        self.assertIn('decayed', report.violation)

    def test_odd_fails_evenness(self):
        report = validate_phi(PhiModel.custom(lambda x: x ** 3, lambda x: 3 * x * x, 10.), np.arange(-5., 6.))
        self.assertFalse(report.passed)
        self.assertIn('even', report.violation)
        self.assertEqual(report.point, -5.)

    def test_confinement_fails(self):
        report = validate_phi(PhiModel.custom(lambda x: x ** 4, lambda x: 4 * x ** 3, 1.), _GRID)
        self.assertFalse(report.passed)
        self.assertIn('Confinement', report.violation)

    def test_single_point_fails(self):
        self.assertFalse(validate_phi(PhiModel.gaussian(1.), np.array([1.])).passed)

    def test_nonfinite_phi(self):
        with np.errstate(divide='ignore'):
            with self.assertRaises(exc.InvalidModel):
                validate_phi(PhiModel.custom(lambda x: np.log(np.abs(x)), lambda x: 1 / x, 1.), np.arange(-5., 6.))

    def test_empty_grid(self):
        with self.assertRaises(exc.ContractError):
            validate_phi(PhiModel.gaussian(1.), np.array([]))


class TestStableSum(unittest.TestCase):

    def test_permutation_invariance(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(1000) * 10. ** rng.integers(-8, 8, 1000)
        total = stable_sum(x)
        for _ in range(10):
            self.assertEqual(stable_sum(rng.permutation(x)), total)

    def test_oddness(self):
        x = np.random.default_rng(1).standard_normal(257)
        self.assertEqual(stable_sum(-x), -stable_sum(x))

    def test_batch(self):
        x = np.random.default_rng(2).standard_normal((3, 5))
        np.testing.assert_allclose(stable_sum(x), x.sum(axis=1), rtol=1e-14)


class TestParticleState(unittest.TestCase):

    def test_sums(self):
        state = ParticleState.from_positions(np.array([1., -2., 3.]))
        self.assertEqual(state.n, 3)
        self.assertEqual(state.s_sum, 2.)
        self.assertEqual(state.t_sum, 14.)
        self.assertTrue(state.sums_consistent())

    def test_inconsistent_sums(self):
        state = ParticleState(x=np.array([1., 2.]), s_sum=3., t_sum=6.)
        self.assertFalse(state.sums_consistent())

    def test_empty(self):
        with self.assertRaises(exc.ContractError):
            ParticleState.from_positions(np.array([]))


class TestDrift(unittest.TestCase):

    def setUp(self):
        self.phi = PhiModel.gaussian(1.)

    def test_zero(self):
        np.testing.assert_array_equal(drift_vector(ParticleState.from_positions(np.zeros(4)), self.phi), np.zeros(4))

    def test_single_particle(self):
        np.testing.assert_allclose(drift_vector(ParticleState.from_positions(np.array([1.])), self.phi), [-0.375])

    def test_balanced_pair(self):
        np.testing.assert_allclose(drift_vector(ParticleState.from_positions(np.array([1., -1.])), self.phi),
                                   [-0.5, 0.5])

    def test_without_interaction(self):
        x = np.array([1., 2.])
        np.testing.assert_allclose(interacting_drift(x, 3., 5., self.phi.phi_prime, interaction=False), [-0.5, -1.])


class TestStarDensity(unittest.TestCase):

    def test_values(self):
        phi = PhiModel.gaussian(1.)
        self.assertEqual(log_density_star(np.zeros(3), StarDensity(phi, 3)), 0.)
        self.assertAlmostEqual(log_density_star(np.array([1.]), StarDensity(phi, 1)), -0.25)
        self.assertAlmostEqual(log_density_star(np.array([1., 1.]), StarDensity(phi, 2)), -1 / 3)

    def test_gradient_is_twice_drift(self):
        rng = np.random.default_rng(3)
        for phi in (PhiModel.gaussian(0.7), PhiModel.custom(_quartic_phi, _quartic_phi_prime, 1.)):
            x = rng.standard_normal(10)
            gradient = grad_log_density_star(x, StarDensity(phi, 10))
            np.testing.assert_allclose(gradient, 2 * drift_vector(ParticleState.from_positions(x), phi), rtol=1e-12)
        np.testing.assert_allclose(grad_log_density_star(np.array([1.]), StarDensity(PhiModel.gaussian(1.), 1)),
                                   [-0.75])

    def test_gradient_matches_differences(self):
        model = StarDensity(PhiModel.gaussian(1.), 6)
        x = np.random.default_rng(4).standard_normal(6)
        gradient = grad_log_density_star(x, model)
        step = 1e-5
        for j in range(6):
            e = np.zeros(6)
            e[j] = step
            estimate = (log_density_star(x + e, model) - log_density_star(x - e, model)) / (2 * step)
            self.assertAlmostEqual(estimate, gradient[j], delta=1e-5)

    def test_batch_matches_rows(self):
        model = StarDensity(PhiModel.gaussian(1.), 4)
        x = np.random.default_rng(5).standard_normal((3, 4))
        batch = log_density_star(x, model)
        for i in range(3):
            self.assertEqual(batch[i], log_density_star(x[i], model))

    def test_wrong_dimension(self):
        with self.assertRaises(exc.ContractError):
            log_density_star(np.zeros(3), StarDensity(PhiModel.gaussian(1.), 4))

    def test_confinement_diagnostics(self):
        model = StarDensity(PhiModel.gaussian(1.), 2)
        diagnostics = confinement_diagnostics(np.array([1., 1.]), model)
        self.assertAlmostEqual(diagnostics.ratio_term, 4 / 9)
        zero = confinement_diagnostics(np.zeros(2), model)
        self.assertEqual(zero.inner_product, 0.)
        self.assertEqual(zero.ratio_term, 0.)
        rng = np.random.default_rng(6)
        model = StarDensity(PhiModel.gaussian(1.), 10)
        for _ in range(100):
            diagnostics = confinement_diagnostics(3 * rng.standard_normal(10), model)
            self.assertLessEqual(diagnostics.inner_product, diagnostics.bound)
            self.assertLessEqual(diagnostics.ratio_term, 10.)


if __name__ == '__main__':
    unittest.main()
