import numpy as np
from django.test import SimpleTestCase
from scipy.stats import linregress

from lab.utils.approximation import (
    best_fixed_direction_fit, constrained_minimize, distance_sq, heat_smooth, lal_decompose, localization_h0,
    orthogonal_split_check, guarantee_radius, project_to_ball, sample_symmetric_steps, smoothing_radius, step_pair,
    step_pair_bound, step_pair_error, step_pair_error_series, localization_pipeline, unconstrained_surrogate,
    universal_approx,
)
from lab.utils.circle_geometry import UNIFORM, PiecewiseTrig, bv_norm, fourier_coeffs, inner_product, norm
from lab.utils.corpus import CORPUS, L_AL_NAMES, SMOOTH_NAMES
from lab.utils.cost import phi
from lab.utils.network import ReluNetwork, SignPattern, to_piecewise


class HeatSmoothingTests(SimpleTestCase):

    def test_bounds_hold_on_corpus(self):
        for name, build in CORPUS.items():
            y = build()
            for r in (1, 2, 4, 8, 16, 32, 64):
                with self.subTest(target=name, r=r):
                    smoothing = heat_smooth(y, r)
                    self.assertTrue(smoothing.tail_certified)
                    self.assertGreaterEqual(smoothing.sup_certified, smoothing.sup)
                    self.assertLessEqual(smoothing.sup_certified, smoothing.sup_y + 1e-12)
                    for check, lhs, rhs in smoothing.checks():
                        self.assertLessEqual(lhs, rhs, check)

    def test_exact_error_for_single_mode(self):
        for r in (1, 3, 10):
            smoothing = heat_smooth(CORPUS['cos_theta'](), r)
            self.assertAlmostEqual(smoothing.error, 0.5 * (1.0 - np.exp(-1.0 / r ** 2)) ** 2, places=12)

    def test_rejects_bad_radius(self):
        for r in (0, 1.5):
            with self.assertRaises(ValueError):
                heat_smooth(CORPUS['step_half'](), r)


class LalDecompositionTests(SimpleTestCase):

    def test_parts_add_up_and_split(self):
        for name, build in CORPUS.items():
            y = build()
            decomposition = lal_decompose(y)
            with self.subTest(target=name):
                self.assertLess(norm(decomposition.y1 + decomposition.y2 - y), 1e-12)
                a, b = fourier_coeffs(decomposition.y2, 1)
                self.assertAlmostEqual(a[1], 0.0, places=12)
                self.assertAlmostEqual(b[1], 0.0, places=12)
                bv_y1, limit = decomposition.bv_check
                self.assertLessEqual(bv_y1, limit + 1e-12)

    def test_symmetric_part_carries_no_linear_term(self):
        decomposition = lal_decompose(CORPUS['half_x1']())
        np.testing.assert_allclose(decomposition.linear_coeffs, [0.5, 0.0], atol=1e-14)
        self.assertLess(norm(decomposition.y2), 1e-12)

    def test_orthogonal_split_for_closure_functions(self):
        f = to_piecewise(step_pair(0.3, 1.2, 0.7)) + PiecewiseTrig.linear((0.2, -0.1))
        for name in ('step_half', 'narrow_step', 'mixture'):
            with self.subTest(target=name):
                lhs, rhs = orthogonal_split_check(f, CORPUS[name]())
                self.assertAlmostEqual(lhs, rhs, delta=1e-10)


class StepPairTests(SimpleTestCase):

    def test_quarter_width(self):
        error, bound = step_pair_error(0.0, np.pi / 4, 1.0)
        self.assertLessEqual(error, bound)
        self.assertAlmostEqual(error / step_pair_error_series(np.pi / 4, 1.0), 1.0, delta=1e-5)

    def test_random_pairs(self):
        rng = np.random.default_rng(314)
        for index in range(100):
            width = rng.uniform(0.01, np.pi - 0.01)
            theta1 = rng.uniform(0.0, 2 * np.pi)
            c = rng.uniform(-3.0, 3.0)
            with self.subTest(pair=index):
                error, bound = step_pair_error(theta1, theta1 + width, c)
                self.assertEqual(bound, step_pair_bound(width, c))

    def test_zero_height_is_empty(self):
        element = step_pair(0.0, 1.0, 0.0)
        self.assertEqual(len(element.j_terms), 0)

    def test_rejects_wide_interval(self):
        with self.assertRaises(ValueError):
            step_pair(0.0, np.pi, 1.0)


class UniversalApproximationTests(SimpleTestCase):

    def test_sampled_steps_within_bound(self):
        for name in L_AL_NAMES:
            for N in (1, 2, 5, 16, 32):
                with self.subTest(target=name, N=N):
                    simple = sample_symmetric_steps(CORPUS[name](), N)
                    self.assertLessEqual(simple.error, simple.bound)

    def test_bound_for_every_pair_count(self):
        for name in L_AL_NAMES:
            y = CORPUS[name]()
            for m_under in range(1, 65):
                with self.subTest(target=name, m_under=m_under):
                    result = universal_approx(y, 2 * m_under, SignPattern.alternating(2 * m_under))
                    self.assertLessEqual(result.error, result.bound)
                    self.assertEqual(result.N, (m_under - 1) // 2)

    def test_error_decays_with_width(self):
        y = CORPUS['half_x1']()
        counts = np.array([4, 8, 16, 32, 64])
        errors = [universal_approx(y, 2 * k, SignPattern.alternating(2 * k)).error for k in counts]
        self.assertLessEqual(linregress(np.log(counts), np.log(errors)).slope, -0.85)

    def test_linear_target_is_exact(self):
        result = universal_approx(CORPUS['cos_theta'](), 2, SignPattern.alternating(2))
        self.assertAlmostEqual(result.error, 0.0, places=14)

    def test_rejects_general_target(self):
        with self.assertRaises(ValueError):
            universal_approx(CORPUS['step_half'](), 8, SignPattern.alternating(8))
        with self.assertRaises(ValueError):
            universal_approx(CORPUS['half_x1'](), 8, SignPattern.alternating(6))


class FixedDirectionFitTests(SimpleTestCase):

    def test_first_order_conditions_on_random_sets(self):
        rng = np.random.default_rng(99)
        for index in range(20):
            y = CORPUS[SMOOTH_NAMES[index % len(SMOOTH_NAMES)]]()
            n_dirs = int(rng.integers(1, 7))
            phases = rng.uniform(0.0, 2 * np.pi, n_dirs)
            directions = np.column_stack([np.cos(phases), np.sin(phases)])
            with self.subTest(set=index, n_dirs=n_dirs):
                fit = best_fixed_direction_fit(directions, SignPattern.alternating(2 * (n_dirs + 1)), y)
                self.assertLessEqual(fit.max_el_residual, 1e-10)
                self.assertLessEqual(fit.residual_l2, inner_product(y, y) + 1e-12)
                self.assertAlmostEqual(fit.residual_l2, distance_sq(to_piecewise(fit.element), y), delta=1e-10)

    def test_linear_only_fit(self):
        fit = best_fixed_direction_fit(np.zeros((0, 2)), SignPattern.alternating(2), CORPUS['cos_theta']())
        self.assertAlmostEqual(fit.residual_l2, 0.0, places=12)
        self.assertEqual(fit.sectors, [])

    def test_direction_budget(self):
        directions = [[1.0, 0.0], [0.0, 1.0]]
        with self.assertRaises(ValueError):
            best_fixed_direction_fit(directions, SignPattern.alternating(4), CORPUS['cos2']())
        fit = best_fixed_direction_fit(directions, SignPattern.alternating(4), CORPUS['cos2'](), include_linear=False)
        self.assertEqual(len(fit.sectors), 4)

    def test_rejects_bad_directions(self):
        with self.assertRaises(ValueError):
            best_fixed_direction_fit([[2.0, 0.0]], SignPattern.alternating(4), CORPUS['cos2']())
        with self.assertRaises(ValueError):
            best_fixed_direction_fit([[1.0, 0.0], [1.0, 0.0]], SignPattern.alternating(6), CORPUS['cos2']())


class LocalizationTests(SimpleTestCase):

    def test_constants(self):
        self.assertAlmostEqual(localization_h0(100.0, 2, 4), 0.035355, places=6)
        self.assertEqual(smoothing_radius(1.0), 1)
        self.assertEqual(smoothing_radius(27.0), 3)
        self.assertEqual(smoothing_radius(100.0), 4)
        self.assertEqual(guarantee_radius(0.1), 4e7)
        self.assertAlmostEqual(guarantee_radius(10.0), 1e12)

    def test_project_to_ball(self):
        W = np.array([[3.0, 4.0]])
        np.testing.assert_array_equal(project_to_ball(W, 10.0), W)
        self.assertAlmostEqual(float(np.linalg.norm(project_to_ball(W, 1.0))), 1.0)

    def test_constrained_minimize_descends_inside_ball(self):
        net = ReluNetwork(SignPattern.alternating(4), np.random.default_rng(8).standard_normal((4, 2)))
        y = CORPUS['half_x1']()
        best, value = constrained_minimize(net, y, UNIFORM, 1.5, steps=50)
        self.assertLessEqual(best.weight_norm, 1.5 + 1e-12)
        self.assertLessEqual(value, phi(net.with_weights(project_to_ball(net.weights, 1.5)), y) + 1e-14)

    def test_surrogate_fits_linear_target(self):
        surrogate = unconstrained_surrogate(CORPUS['cos_theta'](), 2, SignPattern.alternating(2))
        self.assertAlmostEqual(surrogate.value, 0.0, places=12)

    def test_pipeline_at_small_radius(self):
        y = CORPUS['half_x1']()
        signs = SignPattern.alternating(4)
        report = localization_pipeline(y, 4, signs, 100.0, polish_steps=50)
        self.assertEqual(report.branch, 'big')
        self.assertEqual(report.m_prime, 2)
        self.assertEqual(report.r, 4)
        self.assertEqual(report.h0, localization_h0(100.0, 1, 2))
        self.assertGreaterEqual(report.gap, 0.0)
        self.assertLessEqual(report.gap, report.gap_bound)
        self.assertLessEqual(report.network.weight_norm, report.ball_radius + 1e-9)
        self.assertFalse(report.guarantee_regime)

        warm = localization_pipeline(y, 4, signs, 100.0, warm_start=report.network, polish_steps=50)
        self.assertLessEqual(warm.constrained_value, report.constrained_value + 1e-12)

    def test_radius_sweep_is_feasible(self):
        y = CORPUS['half_x1']()
        y = y * (1.0 / norm(y))
        signs = SignPattern.alternating(4)
        surrogate = unconstrained_surrogate(y, 4, signs)
        previous = None
        for R in (1e2, 1e3, 1e4):
            with self.subTest(R=R):
                report = localization_pipeline(y, 4, signs, R, warm_start=previous.network if previous else None,
                                       surrogate=surrogate, polish_steps=50)
                self.assertTrue(report.feasible, report.infeasible_reason)
                self.assertLessEqual(report.W_norm, report.ball_radius)
                self.assertLessEqual(report.gap, report.gap_bound)
                if previous is not None:
                    self.assertLessEqual(report.gap, 1.1 * previous.gap + 1e-12)
            previous = report

    def test_small_branch(self):
        report = localization_pipeline(CORPUS['cos_theta']() * 0.5, 2, SignPattern.alternating(2), 1.0, polish_steps=20)
        self.assertEqual(report.branch, 'small')
        self.assertEqual(report.m_prime, 2)

    def test_rejects_bad_inputs(self):
        with self.assertRaises(ValueError):
            localization_pipeline(CORPUS['half_x1'](), 4, SignPattern.alternating(4), 0.5)
        with self.assertRaises(ValueError):
            localization_pipeline(CORPUS['step_half']() * 3.0, 4, SignPattern.alternating(4), 100.0)

    def test_bv_of_corpus_is_finite(self):
        for name, build in CORPUS.items():
            with self.subTest(target=name):
                self.assertTrue(np.isfinite(bv_norm(build())[2]))
