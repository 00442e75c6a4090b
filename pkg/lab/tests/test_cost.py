import numpy as np
from django.test import SimpleTestCase
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from lab.utils.circle_geometry import UNIFORM, DataMeasure, norm
from lab.utils.corpus import CORPUS
from lab.utils.cost import (
    COST, PENALTY, EnsembleCost, grad_phi, growth_checks, penalty, phi, phi_R_and_grad,
)
from lab.utils.network import ReluNetwork, SignPattern

from .strategies import discrete_measures, networks, unit_targets

FD_STEP = 1e-6


def finite_difference_gradient(cost, W):
    """Central differences of Φ in every coordinate, evaluated as one batch."""
    m = W.shape[0]
    shifts = np.zeros((2 * m * 2, m, 2))
    for k, (i, d) in enumerate(np.ndindex(m, 2)):
        shifts[2 * k, i, d] = FD_STEP
        shifts[2 * k + 1, i, d] = -FD_STEP
    values = cost.value(W[None] + shifts)
    return ((values[0::2] - values[1::2]) / (2.0 * FD_STEP)).reshape(m, 2)


class ExactCostTests(SimpleTestCase):

    @settings(max_examples=50, deadline=None)
    @given(networks(), unit_targets())
    def test_ensemble_matches_piecewise_path(self, net, y):
        cost = EnsembleCost(net.signs, y)
        value, grad = cost.value_and_grad(net.weights)
        self.assertAlmostEqual(float(value), phi(net, y), delta=1e-10 * (1.0 + value))
        np.testing.assert_allclose(grad, grad_phi(net, y), atol=1e-10 * (1.0 + net.weight_norm))

    @settings(max_examples=30, deadline=None)
    @given(networks(), unit_targets(), discrete_measures())
    def test_discrete_measure_paths_agree(self, net, y, measure):
        cost = EnsembleCost(net.signs, y, measure)
        value, grad = cost.value_and_grad(net.weights)
        self.assertAlmostEqual(float(value), phi(net, y, measure), delta=1e-10 * (1.0 + value))
        np.testing.assert_allclose(grad, grad_phi(net, y, measure), atol=1e-10 * (1.0 + net.weight_norm))

    def test_zero_network_cost_is_target_energy(self):
        y = CORPUS['step_half']()
        net = ReluNetwork.zeros(SignPattern.alternating(4))
        self.assertAlmostEqual(phi(net, y), 0.5, places=14)

    def test_exact_fit_has_zero_cost(self):
        net = ReluNetwork(SignPattern((1,)), [[1.0, 0.0]])
        y = CORPUS['clipped_cos']()
        self.assertAlmostEqual(phi(net, y), 0.0, places=14)
        np.testing.assert_allclose(grad_phi(net, y), 0.0, atol=1e-14)


class GradientTests(SimpleTestCase):

    @settings(max_examples=50, deadline=None)
    @given(networks(max_m=8), unit_targets())
    def test_uniform_gradient_matches_finite_differences(self, net, y):
        cost = EnsembleCost(net.signs, y)
        W = np.array(net.weights)
        assume(np.all(np.linalg.norm(W, axis=1) > 1e-2))
        grad = cost.value_and_grad(W)[1]
        fd = finite_difference_gradient(cost, W)
        self.assertLessEqual(np.linalg.norm(fd - grad), 1e-5 * max(np.linalg.norm(grad), 1.0))

    @settings(max_examples=50, deadline=None)
    @given(networks(max_m=8), unit_targets(), discrete_measures())
    def test_discrete_gradient_matches_finite_differences(self, net, y, measure):
        W = np.array(net.weights)
        # smooth configuration: no atom on a node's kink
        margins = np.abs(measure.points @ W.T)
        assume(margins.min() > 1e-4)
        cost = EnsembleCost(net.signs, y, measure)
        grad = cost.value_and_grad(W)[1]
        fd = finite_difference_gradient(cost, W)
        self.assertLessEqual(np.linalg.norm(fd - grad), 1e-5 * max(np.linalg.norm(grad), 1.0))


class GrowthTests(SimpleTestCase):

    def test_growth_and_coercivity_on_random_samples(self):
        rng = np.random.default_rng(7)
        names = list(CORPUS)
        measures = [UNIFORM, DataMeasure.discrete(rng.uniform(0.0, 2 * np.pi, 128))]
        violations = 0
        for batch in range(20):
            y = CORPUS[names[batch % len(names)]]()
            size = norm(y)
            if size > 1.0:
                y = y * (1.0 / size)
            m = int(rng.integers(1, 9))
            signs = SignPattern(tuple(rng.choice([1, -1], m)))
            scale = 10.0 ** rng.uniform(-2.0, 1.5, (500, 1, 1))
            W = scale * rng.standard_normal((500, m, 2))
            values, grads = EnsembleCost(signs, y, measures[batch % 2]).value_and_grad(W)
            w_norm = np.sqrt(np.sum(W ** 2, axis=(1, 2)))
            violations += np.count_nonzero(values > (w_norm + 1.0) ** 2 + 1e-10)
            violations += np.count_nonzero(np.sum(grads ** 2, axis=(1, 2)) > 4.0 * values + 1e-10)
            violations += np.count_nonzero(values - 1.0 > np.sum(grads * W, axis=(1, 2)) + 1e-10)
        self.assertEqual(violations, 0)

    def test_growth_checks_report(self):
        net = ReluNetwork(SignPattern.alternating(4), np.random.default_rng(1).standard_normal((4, 2)))
        report = phi_R_and_grad(net, CORPUS['half_x1'](), UNIFORM, 10.0)
        for name, (lhs, rhs) in growth_checks(net, report).items():
            with self.subTest(check=name):
                self.assertLessEqual(lhs, rhs + 1e-10)


class PenaltyTests(SimpleTestCase):

    def test_branches(self):
        y = CORPUS['half_x1']()
        small = ReluNetwork(SignPattern.alternating(2), [[0.1, 0.0], [0.0, 0.1]])
        report = phi_R_and_grad(small, y, UNIFORM, 1.0)
        self.assertEqual(report.active_branch, COST)
        self.assertEqual(report.phi_R, report.phi)

        large = small * 100.0
        report = phi_R_and_grad(large, y, UNIFORM, 1.0)
        self.assertEqual(report.active_branch, PENALTY)
        self.assertAlmostEqual(report.phi_R, float(penalty(large.weights, 1.0)))
        np.testing.assert_allclose(report.grad_R, 8.0 * large.weights)

    def test_rejects_nonpositive_radius(self):
        with self.assertRaises(ValueError):
            phi_R_and_grad(ReluNetwork.zeros(SignPattern((1,))), CORPUS['half_x1'](), UNIFORM, 0.0)

    @settings(max_examples=30, deadline=None)
    @given(networks(), st.floats(min_value=0.1, max_value=5.0))
    def test_batched_penalty_is_maximum(self, net, R):
        y = CORPUS['two_level']()
        cost = EnsembleCost(net.signs, y)
        value_R, grad_R, value, on_penalty = cost.penalized(net.weights[None], R)
        self.assertEqual(float(value_R[0]), max(float(value[0]), float(penalty(net.weights, R))))
        if on_penalty[0]:
            np.testing.assert_allclose(grad_R[0], 8.0 * net.weights)
