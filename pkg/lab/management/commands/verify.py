import logging
import os

from django.test.runner import DiscoverRunner

from utils.exception_handler import BoundViolation

from ...serializers import VerifySerializer
from ...utils.artifacts import write_csv
from ..base import ExperimentCommand

logger = logging.getLogger(__name__)


class Command(ExperimentCommand):
    help = 'Run the property suite of every module; green is the acceptance gate'
    serializer_class = VerifySerializer

    def add_experiment_arguments(self, parser):
        parser.add_argument('--labels', help='comma separated test labels (default lab.tests)')
        parser.add_argument('--failfast', help='stop at the first failure (true/false)')

    def run_experiment(self, params, output_dir, seed):
        runner = DiscoverRunner(interactive=False, failfast=params['failfast'], verbosity=1)
        failures = runner.run_tests(params['labels'])
        write_csv(os.path.join(output_dir, 'verify.csv'), ('labels', 'failures'),
                  [(' '.join(params['labels']), failures)])
        if failures:
            raise BoundViolation('verify_failures', failures, 0, f"labels={params['labels']}")
        return {'labels': params['labels'], 'failures': failures}
