import logging
import os

import numpy as np

from utils.exception_handler import BoundViolation, check_bound

from ...serializers import FokkerPlanckSerializer
from ...utils.artifacts import write_csv
from ...utils.corpus import resolve_target
from ...utils.dynamics import FPGrid, fokker_planck_1node
from ..base import ExperimentCommand

logger = logging.getLogger(__name__)

HEADER = ('t', 'D', 'rate')


class Command(ExperimentCommand):
    help = 'One-node Fokker–Planck decay of D(t) = ∫(u−1)²e^{−Φ_R/ε²}'
    serializer_class = FokkerPlanckSerializer

    def add_experiment_arguments(self, parser):
        parser.add_argument('--target', help='corpus name, .pwt path or inline pieces')
        parser.add_argument('--eps', type=float, help='noise level ε')
        parser.add_argument('--R', type=float, help='penalization radius')
        parser.add_argument('--n', type=int, help='cells per side of the grid')
        parser.add_argument('--T', type=float, help='time horizon')
        parser.add_argument('--dt', type=float, help='time step')
        parser.add_argument('--scheme', help='implicit or explicit')
        parser.add_argument('--sign', type=int, help='outer sign of the node, 1 or -1')
        parser.add_argument('--r2-min', dest='r2_min', type=float, help='smallest accepted R² of the tail fit')

    def run_experiment(self, params, output_dir, seed):
        y = resolve_target(params['target'])
        report = fokker_planck_1node(y, params['eps'], params['R'], FPGrid(params['n']), params['T'],
                                     params['dt'], scheme=params['scheme'], sign=params['sign'])
        rates = np.append(np.nan, report.rates)
        write_csv(os.path.join(output_dir, 'fokker_planck.csv'), HEADER, zip(report.times, report.D, rates))

        if not report.strictly_decreasing:
            k = int(np.argmax(np.diff(report.D)))
            raise BoundViolation('fokker_planck_D_decreasing', report.D[k + 1], report.D[k],
                                 f"t={report.times[k + 1]:.6g}")
        if not np.isfinite(report.fit_r2):
            raise BoundViolation('fokker_planck_tail_fit', 1.0, 0.0, 'D vanished before the fit window')
        check_bound('fokker_planck_tail_r2', params['r2_min'], report.fit_r2)
        return {'steps': int(report.times.size - 1), 'dt': report.dt, 'half_width': report.half_width,
                'tail_rate': -report.fit_slope, 'tail_r2': report.fit_r2, 'mass_drift': report.mass_drift}
