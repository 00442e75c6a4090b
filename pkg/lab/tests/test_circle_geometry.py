import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st

from lab.utils.circle_geometry import (
    TWO_PI, Arc, DataMeasure, PiecewiseTrig, TrigSeries, arc_moments, bv_norm, dumps_pwt,
    fourier_coeffs, indicator_count, inner_product, loads_pwt, norm, sectors, sym_decompose,
)
from lab.utils.corpus import CORPUS, step_half

from .strategies import angle, dense_mean, pieces


class ArcTests(SimpleTestCase):

    def test_start_is_wrapped(self):
        arc = Arc(-0.5 * np.pi, np.pi)
        self.assertAlmostEqual(arc.start, 1.5 * np.pi)
        self.assertAlmostEqual(np.cos(arc.midpoint), 1.0)

    def test_rejects_bad_width(self):
        with self.assertRaises(ValueError):
            Arc(0.0, 0.0)
        with self.assertRaises(ValueError):
            Arc(0.0, 7.0)

    def test_half_circle_moments(self):
        m1, mc, ms, mcc, mcs, mss = arc_moments(Arc(-0.5 * np.pi, np.pi))
        self.assertAlmostEqual(m1, 0.5, places=15)
        self.assertAlmostEqual(mc, 1.0 / np.pi, places=15)
        self.assertAlmostEqual(ms, 0.0, places=15)
        self.assertAlmostEqual(mcc, 0.25, places=15)
        self.assertAlmostEqual(mcs, 0.0, places=15)
        self.assertAlmostEqual(mss, 0.25, places=15)


class PiecewiseTrigTests(SimpleTestCase):

    def test_from_terms_sums_overlaps(self):
        f = PiecewiseTrig.from_terms([(0.0, np.pi, 1.0, 0.0, 0.0), (0.5 * np.pi, np.pi, 2.0, 0.0, 0.0)])
        self.assertAlmostEqual(float(f.evaluate(0.25 * np.pi)), 1.0)
        self.assertAlmostEqual(float(f.evaluate(0.75 * np.pi)), 3.0)
        self.assertAlmostEqual(float(f.evaluate(1.25 * np.pi)), 2.0)
        self.assertAlmostEqual(float(f.evaluate(1.75 * np.pi)), 0.0)

    def test_rejects_unsorted_breaks(self):
        with self.assertRaises(ValueError):
            PiecewiseTrig(np.array([1.0, 0.5]), np.zeros((2, 3)))

    def test_pwt_text_round_trip(self):
        f = CORPUS['random_pieces']()
        g = loads_pwt(dumps_pwt(f))
        np.testing.assert_array_equal(f.breaks, g.breaks)
        np.testing.assert_array_equal(f.coeffs, g.coeffs)

    def test_pwt_rejects_short_line(self):
        with self.assertRaises(ValueError):
            loads_pwt('0 1 2 3')

    @settings(max_examples=40, deadline=None)
    @given(pieces(), pieces())
    def test_inner_product_matches_quadrature(self, f, g):
        exact = inner_product(f, g)
        approx = dense_mean(lambda theta: f.evaluate(theta) * g.evaluate(theta))
        self.assertAlmostEqual(exact, approx, delta=2e-3)

    @settings(max_examples=40, deadline=None)
    @given(pieces())
    def test_symmetric_decomposition(self, f):
        symmetric, antisymmetric = sym_decompose(f)
        theta = np.linspace(0.0, TWO_PI, 97, endpoint=False) + 1e-3
        np.testing.assert_allclose(symmetric.evaluate(theta) + antisymmetric.evaluate(theta), f.evaluate(theta),
                                   atol=1e-12)
        np.testing.assert_allclose(symmetric.evaluate(theta + np.pi), symmetric.evaluate(theta), atol=1e-12)
        np.testing.assert_allclose(antisymmetric.evaluate(theta + np.pi), -antisymmetric.evaluate(theta),
                                   atol=1e-12)
        self.assertAlmostEqual(inner_product(symmetric, antisymmetric), 0.0, places=12)

    @settings(max_examples=30, deadline=None)
    @given(pieces(), angle, st.floats(min_value=0.1, max_value=TWO_PI))
    def test_arc_integrals_match_quadrature(self, f, start, width):
        exact = f.arc_integrals(np.array([start]), np.array([width]))[0]
        arc = Arc(start, width)
        for k, weight in enumerate((lambda t: 1.0, np.cos, np.sin)):
            approx = dense_mean(lambda theta: arc.contains(theta) * f.evaluate(theta) * weight(theta))
            self.assertAlmostEqual(exact[k], approx, delta=2e-3)


class FourierTests(SimpleTestCase):

    def test_half_step_coefficients(self):
        a, b = fourier_coeffs(step_half(), 5)
        self.assertAlmostEqual(b[0], 0.5, places=15)
        np.testing.assert_allclose(a[1:], [2 / np.pi, 0.0, 2 / (3 * np.pi), 0.0, 2 / (5 * np.pi)], atol=1e-15)
        np.testing.assert_allclose(b[1:], 0.0, atol=1e-15)

    @settings(max_examples=30, deadline=None)
    @given(pieces())
    def test_parseval(self, f):
        a, b = fourier_coeffs(f, 4096)
        energy = b[0] ** 2 + 0.5 * np.sum(a[1:] ** 2 + b[1:] ** 2)
        self.assertLessEqual(energy, inner_product(f, f) + 1e-12)
        self.assertAlmostEqual(energy, inner_product(f, f), delta=2e-3)

    def test_bv_bound_on_corpus(self):
        k = np.arange(1, 257)
        for name, build in CORPUS.items():
            y = build()
            a, b = fourier_coeffs(y, 256)
            bv = bv_norm(y)[2]
            with self.subTest(target=name):
                self.assertTrue(np.all(np.abs(a[1:]) <= 2.0 * bv / k + 1e-12))
                self.assertTrue(np.all(np.abs(b[1:]) <= 2.0 * bv / k + 1e-12))

    def test_trig_series_inner_product_with_pieces(self):
        series = TrigSeries.from_terms(cos_terms={1: 1.0})
        self.assertAlmostEqual(inner_product(series, PiecewiseTrig.linear((1.0, 0.0))), 0.5, places=14)
        self.assertAlmostEqual(norm(series), np.sqrt(0.5), places=14)

    def test_certified_sup_covers_off_grid_maximum(self):
        for k in (3, 17, 100):
            phase = 0.123456789
            series = TrigSeries.from_terms({k: np.sin(k * phase)}, {k: np.cos(k * phase)})
            with self.subTest(k=k):
                estimate, certified = series.sup_bound()
                self.assertLessEqual(estimate, 1.0 + 1e-14)
                self.assertGreaterEqual(certified, 1.0)
                self.assertLess(certified - 1.0, 1e-3)


class BoundedVariationTests(SimpleTestCase):

    def test_step(self):
        sup, variation, bv = bv_norm(step_half())
        self.assertAlmostEqual(sup, 1.0)
        self.assertAlmostEqual(variation, 1.0 / np.pi, places=14)
        self.assertAlmostEqual(bv, 1.0 + 1.0 / np.pi, places=14)

    def test_cosine(self):
        sup, variation, _ = bv_norm(PiecewiseTrig.linear((1.0, 0.0)))
        self.assertAlmostEqual(sup, 1.0, places=14)
        self.assertAlmostEqual(variation, 4.0 / TWO_PI, places=14)

    def test_series_agrees_with_pieces(self):
        series = bv_norm(TrigSeries.from_terms(cos_terms={1: 1.0}))
        pieces_ = bv_norm(PiecewiseTrig.linear((1.0, 0.0)))
        np.testing.assert_allclose(series, pieces_, atol=1e-9)


class SectorTests(SimpleTestCase):

    @settings(max_examples=40, deadline=None)
    @given(st.lists(angle, min_size=1, max_size=8, unique=True))
    def test_indicator_count_constant_on_sectors(self, phases):
        phases = np.array(phases)
        gaps = np.abs(np.angle(np.exp(1j * (phases[:, None] - phases[None, :]))))
        np.fill_diagonal(gaps, np.inf)
        if phases.size > 1 and gaps.min() < 1e-3:
            return
        directions = np.column_stack([np.cos(phases), np.sin(phases)])
        arcs = sectors(directions)
        self.assertAlmostEqual(sum(arc.width for arc in arcs), TWO_PI, places=12)
        for arc in arcs:
            inside = arc.start + np.array([0.05, 0.5, 0.95]) * arc.width
            counts = indicator_count(directions, inside)
            self.assertEqual(len(set(counts.tolist())), 1)

    def test_rejects_zero_direction(self):
        with self.assertRaises(ValueError):
            sectors([[0.0, 0.0]])


class DataMeasureTests(SimpleTestCase):

    def test_weights_must_sum_to_one(self):
        with self.assertRaises(ValueError):
            DataMeasure.discrete([0.0, 1.0], [0.5, 0.6])

    def test_discrete_inner_product(self):
        measure = DataMeasure.discrete([0.0, np.pi])
        f = PiecewiseTrig.linear((1.0, 0.0))
        self.assertAlmostEqual(inner_product(f, f, measure), 1.0, places=15)
