import logging
import os

import numpy as np
from django.conf import settings

from utils.exception_handler import ConfigError, check_bound

from ...serializers import LangevinSerializer
from ...utils.artifacts import write_csv, write_histogram
from ...utils.circle_geometry import UNIFORM
from ...utils.corpus import resolve_target
from ...utils.dynamics import (
    LangevinConfig, langevin_ensemble, parse_marginal, stationary_wnorm_probabilities, total_variation,
)
from ..base import ExperimentCommand

logger = logging.getLogger(__name__)

BASE_HEADER = ('t', 'phi_mean', 'phi_p10', 'phi_p90', 'wnorm_mean', 'wnorm_p10', 'wnorm_p50', 'wnorm_p90')


def histogram_edges(marginals, bins, hist_max):
    edges = {}
    for name in marginals:
        low = 0.0 if name == 'wnorm' else -hist_max
        edges[name] = np.linspace(low, hist_max, bins + 1)
    return edges


class Command(ExperimentCommand):
    help = 'Euler–Maruyama ensemble for the penalized Langevin dynamics'
    serializer_class = LangevinSerializer
    uses_seed = True

    def add_experiment_arguments(self, parser):
        parser.add_argument('--target', help='corpus name, .pwt path or inline pieces')
        parser.add_argument('--m', type=int, help='number of nodes')
        parser.add_argument('--signs', help="sign pattern, e.g. '+,-,+,-' or 'alt:8'")
        parser.add_argument('--eps', type=float, help='noise level ε in (0, 1]')
        parser.add_argument('--R', type=float, help='penalization radius')
        parser.add_argument('--dt', type=float, help='time step')
        parser.add_argument('--T', type=float, help='time horizon')
        parser.add_argument('--n-traj', dest='n_traj', type=int, help='number of trajectories')
        parser.add_argument('--record-every', dest='record_every', type=int, help='steps between snapshots')
        parser.add_argument('--init-scale', dest='init_scale', type=float, help='standard deviation of initial weights')
        parser.add_argument('--marginals', help="comma separated marginals, 'wnorm' or e.g. 'w0y'")
        parser.add_argument('--bins', type=int, help='histogram bins')
        parser.add_argument('--hist-max', dest='hist_max', type=float, help='upper histogram edge')
        parser.add_argument('--compare-stationary', dest='compare_stationary',
                            help='compare |w| with the stationary density (true/false)')
        parser.add_argument('--tv-limit', dest='tv_limit', type=float, help='largest accepted total variation')

    def run_experiment(self, params, output_dir, seed):
        y = resolve_target(params['target'])
        signs = params['sign_pattern']
        marginals = list(dict.fromkeys(params['marginals']))
        try:
            for name in marginals:
                parse_marginal(name)
                if name != 'wnorm' and int(name[1:-1]) >= signs.m:
                    raise ValueError(f"marginal {name!r} refers to a node beyond m={signs.m}")
        except ValueError as exc:
            raise ConfigError('Invalid configuration', {'marginals': [str(exc)]})

        cfg = LangevinConfig(params['eps'], params['R'], params['dt'], params['T'], params['n_traj'], seed,
                             params['record_every'], settings.LAB_WORKERS)
        scale = params['init_scale']

        def init_sampler(rng, count):
            return scale * rng.standard_normal((count, signs.m, 2))

        edges = histogram_edges(marginals, params['bins'], params['hist_max'])
        result = langevin_ensemble(init_sampler, y, UNIFORM, cfg, signs, edges)

        header = BASE_HEADER + tuple(f"{kind}_{name}" for name in marginals for kind in ('mean', 'var'))
        rows = []
        for snap in result.snapshots:
            row = [snap.t, snap.phi_mean, snap.phi_p10, snap.phi_p90,
                   snap.wnorm_mean, snap.wnorm_p10, snap.wnorm_p50, snap.wnorm_p90]
            for name in marginals:
                row.extend((snap.marginal_mean[name], snap.marginal_var[name]))
            rows.append(row)
        write_csv(os.path.join(output_dir, 'langevin.csv'), header, rows)
        final = result.snapshots[-1]
        for name in marginals:
            write_histogram(os.path.join(output_dir, f"hist_{name}.csv"), result.edges[name], final.histograms[name])

        data = {'snapshots': len(rows), 'dropped': result.dropped, 'final_phi_mean': final.phi_mean}
        if params['compare_stationary']:
            probabilities = stationary_wnorm_probabilities(y, UNIFORM, cfg.eps, cfg.R, result.edges['wnorm'],
                                                           sign=signs.signs[0])
            counts = final.histograms['wnorm']
            tv = total_variation(counts, probabilities)
            empirical = counts / max(counts.sum(), 1)
            edges_w = result.edges['wnorm']
            write_csv(os.path.join(output_dir, 'stationary.csv'),
                      ('bin_left', 'bin_right', 'empirical', 'stationary'),
                      zip(edges_w[:-1], edges_w[1:], empirical, probabilities))
            data['total_variation'] = tv
            check_bound('langevin_stationary_tv', tv, params['tv_limit'])
        return data
