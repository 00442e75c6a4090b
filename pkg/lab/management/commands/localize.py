import logging
import os

from django.conf import settings

from utils.exception_handler import BoundViolation, check_bound

from ...serializers import LocalizeSerializer
from ...utils.approximation import localization_pipeline, unconstrained_surrogate
from ...utils.artifacts import write_csv
from ...utils.circle_geometry import norm
from ...utils.corpus import resolve_target
from ..base import ExperimentCommand

logger = logging.getLogger(__name__)

HEADER = ('R', 'h0', 'Wnorm', 'C(m)R', 'feasible', 'constrained', 'unconstrained_est', 'gap', 'gap_bound',
          'r', 'branch', 'm_prime', 'realized', 'surrogate', 'R0', 'guarantee_regime')
GAP_NOISE = 0.10
GAP_FLOOR = 1e-12


class Command(ExperimentCommand):
    help = 'Weight-localization pipeline over a list of ball radii R'
    serializer_class = LocalizeSerializer

    def add_experiment_arguments(self, parser):
        parser.add_argument('--target', help='corpus name, .pwt path or inline pieces')
        parser.add_argument('--m', type=int, help='number of nodes')
        parser.add_argument('--signs', help="sign pattern, e.g. '+,-,+,-' or 'alt:8'")
        parser.add_argument('--R', help='comma separated ball radii')
        parser.add_argument('--normalize', help='scale the target to unit L² norm (true/false)')
        parser.add_argument('--polish-steps', dest='polish_steps', type=int, help='projected gradient steps')

    def run_experiment(self, params, output_dir, seed):
        y = resolve_target(params['target'])
        size = norm(y)
        if params['normalize'] and size > 0.0:
            y = y * (1.0 / size)
        m, signs = params['m'], params['sign_pattern']
        workers = settings.LAB_WORKERS

        surrogate = unconstrained_surrogate(y, m, signs, workers)
        reports, warm_start = [], None
        for R in sorted(params['R']):
            report = localization_pipeline(y, m, signs, R, warm_start=warm_start, surrogate=surrogate,
                                   workers=workers, polish_steps=params['polish_steps'])
            reports.append(report)
            warm_start = report.network

        rows = [(rep.R, rep.h0, rep.W_norm, rep.ball_radius, rep.feasible, rep.constrained_value,
                 rep.unconstrained_estimate, rep.gap, rep.gap_bound, rep.r, rep.branch, rep.m_prime,
                 rep.realized_value, rep.surrogate_value, rep.R0, rep.guarantee_regime) for rep in reports]
        write_csv(os.path.join(output_dir, 'localize.csv'), HEADER, rows)

        for rep in reports:
            if not rep.feasible:
                raise BoundViolation('localization_feasible', rep.W_norm, rep.ball_radius, rep.infeasible_reason)
            check_bound('localization_gap', rep.gap, rep.gap_bound, detail=f"R={rep.R:g}")
        for previous, current in zip(reports, reports[1:]):
            check_bound('localization_gap_trend', current.gap, (1.0 + GAP_NOISE) * previous.gap + GAP_FLOOR,
                        detail=f"R={previous.R:g} -> {current.R:g}")
        return {'rows': len(rows), 'surrogate': surrogate.value, 'surrogate_candidates': surrogate.candidates}
