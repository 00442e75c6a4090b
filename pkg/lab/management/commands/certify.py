import itertools
import logging
import os

from utils.exception_handler import BoundViolation

from ...serializers import CertifySerializer
from ...utils.artifacts import write_csv
from ...utils.dynamics import UNMET, poincare_certificate
from ..base import ExperimentCommand

logger = logging.getLogger(__name__)

HEADER = ('m', 'R', 'eps', 'regime', 'log_C_P', 'C_P', 'log_rate', 'rate', 'valid')
CHECK_HEADER = ('m', 'R', 'eps', 'check', 'scale', 'lhs', 'rhs', 'passed')


class Command(ExperimentCommand):
    help = 'Poincaré constant certificate table over (m, R, ε)'
    serializer_class = CertifySerializer

    def add_experiment_arguments(self, parser):
        parser.add_argument('--m', help='comma separated node counts')
        parser.add_argument('--R', help='comma separated penalization radii')
        parser.add_argument('--eps', help='comma separated noise levels')

    def run_experiment(self, params, output_dir, seed):
        certificates = [poincare_certificate(m, R, eps)
                        for m, R, eps in itertools.product(params['m'], params['R'], params['eps'])]
        rows, check_rows = [], []
        for cert in certificates:
            rows.append((cert.m, cert.R, cert.eps, cert.regime, cert.log_C_P, cert.C_P_bound,
                         cert.log_rate, cert.rate_bound, cert.valid))
            for check in cert.checks:
                check_rows.append((cert.m, cert.R, cert.eps, check.name, check.scale,
                                   check.lhs, check.rhs, check.passed))
        write_csv(os.path.join(output_dir, 'certify.csv'), HEADER, rows)
        write_csv(os.path.join(output_dir, 'certify_checks.csv'), CHECK_HEADER, check_rows)

        for cert in certificates:
            for check in cert.checks:
                if not check.passed:
                    raise BoundViolation(check.name, check.lhs, check.rhs,
                                         f"m={cert.m} R={cert.R:g} eps={cert.eps:g} ({check.scale} scale)")
        unmet = sum(cert.regime == UNMET for cert in certificates)
        if unmet:
            logger.info(f"certify: {unmet} of {len(certificates)} parameter sets outside the hypotheses")
        return {'rows': len(rows), 'hypotheses_unmet': unmet}
