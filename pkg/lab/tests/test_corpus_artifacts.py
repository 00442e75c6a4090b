import json
import os
import tempfile

import numpy as np
from django.test import SimpleTestCase

from lab.utils.artifacts import format_value, read_csv, write_csv, write_histogram, write_manifest
from lab.utils.circle_geometry import UNIFORM, PiecewiseTrig, dumps_pwt, norm
from lab.utils.corpus import CORPUS, resolve_measure, resolve_target


class ResolveTargetTests(SimpleTestCase):

    def test_corpus_names(self):
        for name in CORPUS:
            with self.subTest(target=name):
                self.assertIsNotNone(resolve_target(f"  {name} "))

    def test_inline_pieces(self):
        y = resolve_target('0 3.141592653589793 1 0 0; 3.141592653589793 3.141592653589793 -1 0 0')
        self.assertIsInstance(y, PiecewiseTrig)
        self.assertAlmostEqual(norm(y), 1.0, places=14)

    def test_pwt_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'target.pwt')
            with open(path, 'w', encoding='utf-8') as handle:
                handle.write(dumps_pwt(CORPUS['two_level']()))
            y = resolve_target(path)
        self.assertLess(norm(y - CORPUS['two_level']()), 1e-15)

    def test_errors(self):
        with self.assertRaises(FileNotFoundError):
            resolve_target('/nonexistent/target.pwt')
        with self.assertRaises(ValueError):
            resolve_target('no_such_target')


class ResolveMeasureTests(SimpleTestCase):

    def test_kinds(self):
        self.assertIs(resolve_measure('Uniform', 0), UNIFORM)
        grid = resolve_measure('grid:8', 0)
        np.testing.assert_allclose(grid.points[2], [0.0, 1.0], atol=1e-15)
        np.testing.assert_array_equal(resolve_measure('random:16', 5).points, resolve_measure('random:16', 5).points)

    def test_rejects_unknown(self):
        for spec in ('grid', 'grid:0', 'sphere:4'):
            with self.subTest(spec=spec), self.assertRaises(ValueError):
                resolve_measure(spec, 0)


class ArtifactTests(SimpleTestCase):

    def test_format_value(self):
        self.assertEqual(format_value(0.1), '0.10000000000000001')
        self.assertEqual(format_value(np.float64(1.0) / 3.0), '0.33333333333333331')
        self.assertEqual(format_value(np.int64(7)), '7')
        self.assertEqual(format_value(True), '1')
        self.assertEqual(format_value(None), '')
        self.assertEqual(format_value(float('inf')), 'inf')

    def test_csv_values_round_trip(self):
        values = np.random.default_rng(4).standard_normal(20)
        with tempfile.TemporaryDirectory() as tmp:
            path = write_csv(os.path.join(tmp, 'nested', 'values.csv'), ('k', 'value'), enumerate(values))
            rows = read_csv(path)
        self.assertEqual([float(row['value']) for row in rows], values.tolist())
        self.assertEqual(rows[3]['k'], '3')

    def test_histogram_rows(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_histogram(os.path.join(tmp, 'hist.csv'), np.array([0.0, 0.5, 1.0]), np.array([3, 4]))
            rows = read_csv(path)
        self.assertEqual(rows[1], {'bin_left': '0.5', 'bin_right': '1', 'count': '4'})

    def test_manifest_is_plain_json(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_manifest(tmp, {'seed': np.int64(3), 'bound': float('inf'), 'values': np.arange(2.0)})
            with open(path, 'r', encoding='utf-8') as handle:
                manifest = json.load(handle)
        self.assertEqual(manifest, {'seed': 3, 'bound': 'inf', 'values': [0.0, 1.0]})
