import logging
import os

import numpy as np
from scipy.stats import linregress

from utils.exception_handler import check_bound

from ...serializers import ApproxSerializer
from ...utils.approximation import lal_decompose, universal_approx
from ...utils.artifacts import write_csv
from ...utils.circle_geometry import inner_product
from ...utils.corpus import resolve_target
from ...utils.network import SignPattern
from ..base import ExperimentCommand

logger = logging.getLogger(__name__)

HEADER = ('m_under', 'm', 'N', 'error_l_al', 'bound', 'off_l_al', 'error_total')
SLOPE_FROM = 4
SLOPE_LIMIT = -1.0 + 0.15


class Command(ExperimentCommand):
    help = 'Universal approximation sweep over m̲ with the 62‖y‖²_BV/m̲ bound'
    serializer_class = ApproxSerializer

    def add_experiment_arguments(self, parser):
        parser.add_argument('--target', help='corpus name, .pwt path or inline pieces')
        parser.add_argument('--m-under', dest='m_under', help='comma separated values of m̲')

    def run_experiment(self, params, output_dir, seed):
        y = resolve_target(params['target'])
        decomposition = lal_decompose(y)
        off = inner_product(decomposition.y2, decomposition.y2)
        if off > 0.0:
            logger.info(f"approx: target has ‖y2‖² = {off:.6g} outside the symmetric-plus-linear space")

        rows, points = [], []
        for m_under in sorted(set(params['m_under'])):
            m = 2 * m_under
            result = universal_approx(decomposition.y1, m, SignPattern.alternating(m))
            rows.append((m_under, m, result.N, result.error, result.bound, off, result.error + off))
            if m_under >= SLOPE_FROM and result.error > 0.0:
                points.append((m_under, result.error))
        write_csv(os.path.join(output_dir, 'approx.csv'), HEADER, rows)

        data = {'rows': len(rows), 'off_l_al': off}
        if len(points) >= 2:
            fit = linregress(np.log([p[0] for p in points]), np.log([p[1] for p in points]))
            data['slope'] = float(fit.slope)
            check_bound('approx_decay_slope', fit.slope, SLOPE_LIMIT, detail=f"m̲ >= {SLOPE_FROM}")
        return data
