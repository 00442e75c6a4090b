import logging
import os

import numpy as np

from utils.exception_handler import check_bound

from ...serializers import FlowSerializer
from ...utils.artifacts import write_csv
from ...utils.circle_geometry import norm
from ...utils.corpus import resolve_measure, resolve_target
from ...utils.cost import EnsembleCost
from ...utils.dynamics import FlowConfig, gradient_flow
from ...utils.network import ReluNetwork
from ..base import ExperimentCommand

logger = logging.getLogger(__name__)

HEADER = ('t', 'phi', 'wnorm', 'grad_norm_sq', 'w_dot_grad')
GROWTH_SLACK = 1e-10


class Command(ExperimentCommand):
    help = 'Deterministic gradient flow of Φ from a seeded random start'
    serializer_class = FlowSerializer
    uses_seed = True

    def add_experiment_arguments(self, parser):
        parser.add_argument('--target', help='corpus name, .pwt path or inline pieces')
        parser.add_argument('--m', type=int, help='number of nodes')
        parser.add_argument('--signs', help="sign pattern, e.g. '+,-,+,-' or 'alt:8'")
        parser.add_argument('--measure', help="'uniform', 'grid:N' or 'random:N'")
        parser.add_argument('--dt', type=float, help='time step')
        parser.add_argument('--T', type=float, help='time horizon')
        parser.add_argument('--integrator', help='euler or rk4')
        parser.add_argument('--record-every', dest='record_every', type=int, help='steps between CSV rows')
        parser.add_argument('--init-scale', dest='init_scale', type=float, help='standard deviation of initial weights')

    def run_experiment(self, params, output_dir, seed):
        y = resolve_target(params['target'])
        measure = resolve_measure(params['measure'], seed)
        signs = params['sign_pattern']
        rng = np.random.default_rng(seed)
        net0 = ReluNetwork(signs, params['init_scale'] * rng.standard_normal((signs.m, 2)))
        cfg = FlowConfig(params['dt'], params['T'], params['integrator'], params['record_every'])

        trajectory = gradient_flow(net0, y, measure, cfg)
        weights = np.stack(trajectory.weights)
        phis, grads = EnsembleCost(signs, y, measure).value_and_grad(weights)
        norms = np.sqrt(np.sum(weights ** 2, axis=(1, 2)))
        grad_sq = np.sum(grads ** 2, axis=(1, 2))
        w_dot_grad = np.sum(grads * weights, axis=(1, 2))
        rows = zip(trajectory.times, phis, norms, grad_sq, w_dot_grad)
        write_csv(os.path.join(output_dir, 'flow.csv'), HEADER, rows)

        if trajectory.aborted:
            check_bound('flow_finite', 1.0, 0.0, detail='weights left the finite range')
        slack = 10.0 * cfg.record_every * cfg.dt ** 2 * (1.0 + phis[0])
        increases = np.diff(phis)
        if increases.size:
            k = int(np.argmax(increases))
            check_bound('flow_phi_decreasing', phis[k + 1], phis[k], slack=slack,
                        detail=f"t={trajectory.times[k + 1]:.6g}")
        if norm(y, measure) <= 1.0:
            k = int(np.argmax(phis - (norms + 1.0) ** 2))
            check_bound('phi_growth', phis[k], (norms[k] + 1.0) ** 2, slack=GROWTH_SLACK)
            k = int(np.argmax(grad_sq - 4.0 * phis))
            check_bound('grad_bound', grad_sq[k], 4.0 * phis[k], slack=GROWTH_SLACK)
            k = int(np.argmax(phis - 1.0 - w_dot_grad))
            check_bound('coercivity', phis[k] - 1.0, w_dot_grad[k], slack=GROWTH_SLACK)
        return {'steps_recorded': len(trajectory.times), 'final_phi': float(phis[-1]),
                'halvings': trajectory.halvings}
