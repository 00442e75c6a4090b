import logging
import os

from ...serializers import DivergeSerializer
from ...utils.artifacts import write_csv
from ...utils.dynamics import FlowConfig, divergence_experiment
from ..base import ExperimentCommand

logger = logging.getLogger(__name__)

HEADER = ('t', 'b', 'wnorm', 'phi')


class Command(ExperimentCommand):
    help = 'Gradient flow escaping to infinity for the half-plane target I{x₂≥0}x₁'
    serializer_class = DivergeSerializer

    def add_experiment_arguments(self, parser):
        parser.add_argument('--b0', type=float, help='initial b, at least 1')
        parser.add_argument('--T', type=float, help='time horizon')
        parser.add_argument('--dt', type=float, help='first integration step')
        parser.add_argument('--integrator', help='euler or rk4 for the unreduced flow')
        parser.add_argument('--threshold', type=float, help='|W| level whose crossing time is reported')

    def run_experiment(self, params, output_dir, seed):
        cfg = FlowConfig(params['dt'], params['T'], params['integrator'])
        report = divergence_experiment(params['b0'], cfg, params['threshold'])
        rows = zip(report.times, report.b, report.weight_norms, report.phis)
        write_csv(os.path.join(output_dir, 'diverge.csv'), HEADER, rows)
        return {
            'steps': int(report.times.size),
            'final_b': float(report.b[-1]),
            'max_e1': report.max_e1,
            'max_e2_gap': report.max_e2_gap,
            'threshold_time': report.threshold_time,
            'full_off_line': report.full_off_line,
            'full_b_gap': report.full_b_gap,
        }
