import logging
import os
import time

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from django.db import DatabaseError
from dotenv import dotenv_values

from utils.exception_handler import EXIT_CONFIG_ERROR, EXIT_OK, ConfigError, handle_lab_exception
from utils.helpers import create_result

from ..models import ExperimentRun
from ..utils.artifacts import package_versions, write_manifest

logger = logging.getLogger(__name__)


class ExperimentCommand(BaseCommand):
    """
    Shared plumbing for laboratory subcommands.

    Parameters come from an optional KEY=VALUE config file, overridden by
    command-line options, and are validated by `serializer_class` before
    anything is computed. Each run writes its artifacts plus manifest.json
    into the output directory and, when enabled, an ExperimentRun row.
    Exit codes: 0 pass, 1 bound violation, 2 invalid configuration.
    """
    serializer_class = None
    uses_seed = False

    @property
    def command_name(self) -> str:
        return self.__module__.rsplit('.', 1)[-1]

    def add_arguments(self, parser):
        parser.add_argument('--config', help='KEY=VALUE experiment config file')
        parser.add_argument('--output-dir', dest='output_dir', help='directory for CSV files and manifest.json')
        parser.add_argument('--seed', type=int, help='random seed (default LAB_DEFAULT_SEED)')
        self.add_experiment_arguments(parser)

    def add_experiment_arguments(self, parser):
        pass

    def run_experiment(self, params: dict, output_dir: str, seed: int) -> dict:
        raise NotImplementedError

    def collect_params(self, options) -> dict:
        params = {}
        fields = self.serializer_class().fields
        known = {field_name.lower(): field_name for field_name in fields}
        known['seed'] = 'seed'
        config_path = options.get('config')
        if config_path:
            if not os.path.isfile(config_path):
                raise ConfigError(f"config file not found: {config_path}")
            unknown = []
            for key, value in dotenv_values(config_path).items():
                key = key.strip().replace('-', '_')
                if key.lower() not in known:
                    unknown.append(key)
                elif value is not None:
                    params[known[key.lower()]] = value
            if unknown:
                raise ConfigError('Invalid configuration', {key: ['unknown parameter'] for key in unknown})
        for field_name in fields:
            value = options.get(field_name)
            if value is not None:
                params[field_name] = value
        return params

    def handle(self, *args, **options):
        started = time.perf_counter()
        name = self.command_name
        output_dir = options.get('output_dir') or os.path.join(settings.LAB_OUTPUT_DIR, name)
        params = {}

        try:
            params = self.collect_params(options)
            seed = options.get('seed')
            if seed is None:
                seed = int(params.pop('seed', settings.LAB_DEFAULT_SEED))
            else:
                params.pop('seed', None)
            serializer = self.serializer_class(data=params)
            if not serializer.is_valid():
                raise ConfigError('Invalid configuration', serializer.errors)
        except (ConfigError, ValueError) as e:
            code, payload = handle_lab_exception(e, {'phase': 'config', 'command': name})
            logger.error(f"{name}: invalid configuration: {payload.get('errors')}")
            self.record(name, params, None, output_dir, ExperimentRun.INVALID, code, time.perf_counter() - started)
            raise CommandError(f"{payload['message']}: {payload.get('errors')}", returncode=EXIT_CONFIG_ERROR)

        config_echo = {key: value for key, value in serializer.validated_data.items() if key != 'sign_pattern'}
        run = self.record(name, config_echo, seed if self.uses_seed else None, output_dir, ExperimentRun.RUNNING)
        logger.info(f"{name}: starting with {config_echo}")

        try:
            data = self.run_experiment(serializer.validated_data, output_dir, seed)
            code, payload = EXIT_OK, create_result(True, f"{name} passed", data=data)
        except Exception as e:
            code, payload = handle_lab_exception(e, {'command': name})
            payload = create_result(False, payload['message'], errors=payload.get('errors', payload.get('error')),
                                    exit_code=code)

        wall_time = time.perf_counter() - started
        write_manifest(output_dir, {
            'command': name,
            'config': config_echo,
            'seed': seed if self.uses_seed else None,
            'versions': package_versions(),
            'wall_time': wall_time,
            'result': payload,
        })
        status = ExperimentRun.PASSED if code == EXIT_OK else ExperimentRun.FAILED
        self.finish(run, status, code, wall_time)

        if code != EXIT_OK:
            raise CommandError(f"{payload['message']}: {payload.get('errors')}", returncode=code)
        self.stdout.write(self.style.SUCCESS(f"{name} passed in {wall_time:.2f}s; artifacts in {output_dir}"))

    def record(self, name, config, seed, output_dir, status, exit_code=None, wall_time=None):
        if not settings.LAB_RECORD_RUNS:
            return None
        try:
            return ExperimentRun.objects.create(
                subcommand=name,
                config={key: str(value) for key, value in config.items()} if status == ExperimentRun.INVALID
                else _json_ready(config),
                seed=seed,
                status=status,
                exit_code=exit_code,
                wall_time=wall_time,
                output_dir=output_dir,
            )
        except DatabaseError as e:
            logger.warning(f"could not record {name} run: {str(e)}")
            return None

    def finish(self, run, status, exit_code, wall_time):
        if run is None:
            return
        try:
            run.status = status
            run.exit_code = exit_code
            run.wall_time = wall_time
            run.save(update_fields=['status', 'exit_code', 'wall_time'])
        except DatabaseError as e:
            logger.warning(f"could not update run #{run.pk}: {str(e)}")


def _json_ready(config: dict) -> dict:
    ready = {}
    for key, value in config.items():
        if isinstance(value, (list, tuple)):
            ready[key] = [v if isinstance(v, (int, float, str, bool)) else str(v) for v in value]
        elif isinstance(value, (int, float, str, bool)) or value is None:
            ready[key] = value
        else:
            ready[key] = str(value)
    return ready
