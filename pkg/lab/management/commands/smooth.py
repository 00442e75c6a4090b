import logging
import os

from utils.exception_handler import check_bound

from ...serializers import SmoothSerializer
from ...utils.approximation import heat_smooth
from ...utils.artifacts import write_csv
from ...utils.corpus import resolve_target
from ..base import ExperimentCommand

logger = logging.getLogger(__name__)

HEADER = ('r', 'K', 'bv', 'sup_y', 'sup_yr', 'sup_yr_certified', 'c1', 'c1_bound',
          'l2_error', 'l2_bound', 'tail_bound', 'tail_certified')


class Command(ExperimentCommand):
    help = 'Heat-smoothing sweep: sup, C¹ and L² error bounds of y_r for each r'
    serializer_class = SmoothSerializer

    def add_experiment_arguments(self, parser):
        parser.add_argument('--target', help='corpus name, .pwt path or inline pieces')
        parser.add_argument('--r', help='comma separated smoothing radii')
        parser.add_argument('--cap', type=int, help='largest Fourier cutoff')

    def run_experiment(self, params, output_dir, seed):
        y = resolve_target(params['target'])
        rows, results = [], []
        for r in params['r']:
            result = heat_smooth(y, r, cap=params['cap'])
            results.append(result)
            rows.append((r, result.K, result.bv, result.sup_y, result.sup, result.sup_certified,
                         result.c1, result.c1_bound, result.error, result.error_bound,
                         result.tail_bound, result.tail_certified))
        write_csv(os.path.join(output_dir, 'smooth.csv'), HEADER, rows)

        for result in results:
            for name, lhs, rhs in result.checks():
                check_bound(f"heat_smoothing_{name}", lhs, rhs, detail=f"r={result.r}")
        return {'rows': len(rows), 'bv': results[0].bv}
