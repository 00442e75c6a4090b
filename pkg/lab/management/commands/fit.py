import logging
import os

import numpy as np

from utils.exception_handler import ConfigError, check_bound

from ...serializers import FitSerializer
from ...utils.approximation import best_fixed_direction_fit
from ...utils.artifacts import write_csv
from ...utils.circle_geometry import TWO_PI
from ...utils.corpus import resolve_target
from ..base import ExperimentCommand

logger = logging.getLogger(__name__)

HEADER = ('set', 'n_dirs', 'residual_l2', 'max_el_residual', 'rank_deficient',
          'linear_x', 'linear_y', 'alpha_ok', 'u_ok', 'sector_slopes_ok')
SECTOR_HEADER = ('set', 'start', 'width', 'el_x', 'el_y', 'slope_norm', 'slope_bound')


def direction_sets(params, seed, budget):
    """Explicit angles give one set; otherwise n_sets random sorted sets of 1..max_dirs angles."""
    if params['directions']:
        return [np.sort(np.mod(np.asarray(params['directions'], dtype=float), TWO_PI))]
    rng = np.random.default_rng(seed)
    largest = min(params['max_dirs'], budget)
    sets = []
    for _ in range(params['n_sets']):
        count = int(rng.integers(1, largest + 1))
        sets.append(np.sort(rng.uniform(0.0, TWO_PI, count)))
    return sets


class Command(ExperimentCommand):
    help = 'Fixed-direction least-squares closure fits with per-sector stationarity residuals'
    serializer_class = FitSerializer
    uses_seed = True

    def add_experiment_arguments(self, parser):
        parser.add_argument('--target', help='corpus name, .pwt path or inline pieces')
        parser.add_argument('--m', type=int, help='number of nodes')
        parser.add_argument('--signs', help="sign pattern, e.g. '+,-,+,-' or 'alt:8'")
        parser.add_argument('--directions', help='comma separated direction angles in radians')
        parser.add_argument('--n-sets', dest='n_sets', type=int, help='number of random direction sets')
        parser.add_argument('--max-dirs', dest='max_dirs', type=int, help='largest random direction set')
        parser.add_argument('--include-linear', dest='include_linear', help='fit the linear part too (true/false)')
        parser.add_argument('--el-tol', dest='el_tol', type=float, help='tolerance on sector residuals')

    def run_experiment(self, params, output_dir, seed):
        y = resolve_target(params['target'])
        signs = params['sign_pattern']
        include_linear = params['include_linear']
        budget = signs.m_under - (1 if include_linear else 0)
        if budget < 1 or len(params['directions']) > budget:
            limit = max(budget, 0)
            raise ConfigError('Invalid configuration',
                              {'directions': [f"sign pattern {signs} allows at most {limit} directions"]})

        rows, sector_rows, fits = [], [], []
        for index, angles in enumerate(direction_sets(params, seed, budget)):
            directions = np.column_stack([np.cos(angles), np.sin(angles)])
            fit = best_fixed_direction_fit(directions, signs, y, include_linear)
            fits.append(fit)
            rows.append((index, angles.size, fit.residual_l2, fit.max_el_residual, fit.rank_deficient,
                         fit.linear[0], fit.linear[1],
                         all(entry.alpha_ok for entry in fit.slope_report),
                         all(entry.u_ok for entry in fit.slope_report),
                         all(entry.ok for entry in fit.sector_slopes)))
            for arc, el, slope in zip(fit.sectors, fit.el_residuals, fit.sector_slopes):
                sector_rows.append((index, arc.start, arc.width, el[0], el[1], slope.slope_norm, slope.bound))
        write_csv(os.path.join(output_dir, 'fit.csv'), HEADER, rows)
        write_csv(os.path.join(output_dir, 'fit_sectors.csv'), SECTOR_HEADER, sector_rows)

        worst = max(fits, key=lambda fit: fit.max_el_residual)
        if include_linear:
            check_bound('euler_lagrange_sector_residual', worst.max_el_residual, params['el_tol'])
        else:
            logger.info(f"fit: linear part excluded, sector residuals reported only (max {worst.max_el_residual:.3g})")
        return {'sets': len(rows), 'max_el_residual': worst.max_el_residual,
                'best_residual_l2': min(fit.residual_l2 for fit in fits)}
