import json
import os
import tempfile
from io import StringIO
from unittest import mock

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase, override_settings

from lab.models import ExperimentRun
from lab.utils.artifacts import read_csv


@override_settings(LAB_RECORD_RUNS=True)
class ExperimentCommandTests(TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def out(self, *parts):
        return os.path.join(self.tmp.name, *parts)

    def run_command(self, name, output='run', **options):
        call_command(name, output_dir=self.out(output), stdout=StringIO(), **options)
        return self.out(output)

    def manifest(self, output_dir):
        with open(os.path.join(output_dir, 'manifest.json'), 'r', encoding='utf-8') as handle:
            return json.load(handle)

    def test_certify_rows(self):
        output = self.run_command('certify', m='2400,100', R='10,5', eps='1')
        rows = read_csv(os.path.join(output, 'certify.csv'))
        self.assertEqual(len(rows), 4)
        by_key = {(row['m'], row['R']): row for row in rows}
        self.assertEqual(by_key[('2400', '10')]['regime'], 'high-node')
        self.assertAlmostEqual(float(by_key[('2400', '10')]['C_P']), 140.0)
        self.assertAlmostEqual(float(by_key[('100', '10')]['log_C_P']), np.log(1.0 / 8.0) + 402.0, places=9)
        self.assertEqual(by_key[('100', '5')]['valid'], '0')

        manifest = self.manifest(output)
        self.assertEqual(manifest['command'], 'certify')
        self.assertIsNone(manifest['seed'])
        self.assertTrue(manifest['result']['success'])
        self.assertEqual(manifest['result']['data']['hypotheses_unmet'], 2)
        self.assertIn('numpy', manifest['versions'])

        run = ExperimentRun.objects.get()
        self.assertEqual(run.status, ExperimentRun.PASSED)
        self.assertEqual(run.exit_code, 0)

    def test_config_file_keeps_parameter_case(self):
        path = self.out('certify.env')
        with open(path, 'w', encoding='utf-8') as handle:
            handle.write('m=10\nR=20\neps=0.5\n')
        output = self.run_command('certify', config=path)
        row = read_csv(os.path.join(output, 'certify.csv'))[0]
        self.assertEqual((row['m'], row['R'], row['eps']), ('10', '20', '0.5'))
        self.assertEqual(row['C_P'], 'inf')

    def test_command_line_overrides_config(self):
        path = self.out('certify.env')
        with open(path, 'w', encoding='utf-8') as handle:
            handle.write('m=10\nR=20\n')
        output = self.run_command('certify', config=path, m='2400', R='10')
        row = read_csv(os.path.join(output, 'certify.csv'))[0]
        self.assertEqual(row['regime'], 'high-node')

    def test_invalid_configuration_exits_2(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command('certify', m='abc')
        self.assertEqual(ctx.exception.returncode, 2)
        run = ExperimentRun.objects.get()
        self.assertEqual(run.status, ExperimentRun.INVALID)
        self.assertEqual(run.config, {'m': 'abc'})

    def test_unknown_config_key_exits_2(self):
        path = self.out('bad.env')
        with open(path, 'w', encoding='utf-8') as handle:
            handle.write('m=10\nradius=3\n')
        with self.assertRaises(CommandError) as ctx:
            self.run_command('certify', config=path)
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn('radius', str(ctx.exception))

    def test_missing_config_file_exits_2(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command('certify', config=self.out('missing.env'))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_unknown_target_exits_2(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command('smooth', target='no_such_target')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_bound_violation_exits_1(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command('fokker_planck', n=8, T=1.0, dt=0.05, r2_min=1.1)
        self.assertEqual(ctx.exception.returncode, 1)
        manifest = self.manifest(self.out('run'))
        self.assertFalse(manifest['result']['success'])
        self.assertEqual(manifest['result']['errors']['inequality'], 'fokker_planck_tail_r2')
        self.assertEqual(ExperimentRun.objects.get().status, ExperimentRun.FAILED)
        self.assertTrue(os.path.isfile(self.out('run', 'fokker_planck.csv')))

    def test_smooth_rows(self):
        output = self.run_command('smooth', target='step_half', r='1,4,16')
        rows = read_csv(os.path.join(output, 'smooth.csv'))
        self.assertEqual([row['r'] for row in rows], ['1', '4', '16'])
        for row in rows:
            self.assertLessEqual(float(row['l2_error']), float(row['l2_bound']))

    def test_approx_rows(self):
        output = self.run_command('approx', target='half_x1', m_under='4,8,16,32')
        rows = read_csv(os.path.join(output, 'approx.csv'))
        self.assertEqual([row['m'] for row in rows], ['8', '16', '32', '64'])

    def test_diverge_short_horizon(self):
        output = self.run_command('diverge', T=50.0)
        b = [float(row['b']) for row in read_csv(os.path.join(output, 'diverge.csv'))]
        self.assertTrue(np.all(np.diff(b) > 0.0))
        self.assertIsNone(self.manifest(output)['result']['data']['threshold_time'])

    def test_fit_writes_sector_table(self):
        output = self.run_command('fit', target='cos2', m=8, n_sets=3, max_dirs=3)
        self.assertEqual(len(read_csv(os.path.join(output, 'fit.csv'))), 3)
        self.assertTrue(read_csv(os.path.join(output, 'fit_sectors.csv')))

    def test_seeded_reruns_are_byte_identical(self):
        options = {'target': 'half_x1', 'm': 4, 'T': 0.5, 'dt': 0.01, 'seed': 17}
        first = self.run_command('flow', output='a', **options)
        second = self.run_command('flow', output='b', **options)
        with open(os.path.join(first, 'flow.csv'), 'rb') as a, open(os.path.join(second, 'flow.csv'), 'rb') as b:
            self.assertEqual(a.read(), b.read())
        self.assertEqual(self.manifest(first)['seed'], 17)

    def test_langevin_histograms(self):
        output = self.run_command('langevin', T=0.1, dt=0.01, n_traj=64, record_every=5, bins=10)
        rows = read_csv(os.path.join(output, 'langevin.csv'))
        self.assertEqual(len(rows), 3)
        histogram = read_csv(os.path.join(output, 'hist_wnorm.csv'))
        self.assertEqual(len(histogram), 10)
        self.assertGreaterEqual(sum(int(row['count']) for row in histogram), 60)

    @override_settings(LAB_RECORD_RUNS=False)
    def test_recording_can_be_disabled(self):
        self.run_command('certify')
        self.assertFalse(ExperimentRun.objects.exists())


class VerifyCommandTests(TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    @mock.patch('lab.management.commands.verify.DiscoverRunner.run_tests', return_value=0)
    def test_green_suite(self, run_tests):
        call_command('verify', labels='lab.tests.test_corpus_artifacts', output_dir=self.tmp.name, stdout=StringIO())
        run_tests.assert_called_once_with(['lab.tests.test_corpus_artifacts'])
        rows = read_csv(os.path.join(self.tmp.name, 'verify.csv'))
        self.assertEqual(rows[0]['failures'], '0')

    @mock.patch('lab.management.commands.verify.DiscoverRunner.run_tests', return_value=2)
    def test_failures_exit_1(self, run_tests):
        with self.assertRaises(CommandError) as ctx:
            call_command('verify', output_dir=self.tmp.name, stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 1)
        run_tests.assert_called_once_with(['lab.tests'])
