import logging

from rest_framework.exceptions import ValidationError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_BOUND_VIOLATION = 1
EXIT_CONFIG_ERROR = 2


class LabError(Exception):
    """Base class for laboratory failures that map onto an exit code."""
    exit_code = EXIT_BOUND_VIOLATION


class ConfigError(LabError):
    exit_code = EXIT_CONFIG_ERROR

    def __init__(self, message, errors=None):
        super().__init__(message)
        self.errors = errors


class BoundViolation(LabError):
    """An asserted inequality lhs ≤ rhs failed."""
    exit_code = EXIT_BOUND_VIOLATION

    def __init__(self, name: str, lhs: float, rhs: float, detail: str = ''):
        self.name = name
        self.lhs = float(lhs)
        self.rhs = float(rhs)
        message = f"{name}: lhs={self.lhs:.17g} > rhs={self.rhs:.17g}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


def check_bound(name: str, lhs: float, rhs: float, slack: float = 0.0, detail: str = '') -> None:
    if not lhs <= rhs + slack:
        logger.error(f"Bound violated: {name} lhs={lhs!r} rhs={rhs!r}")
        raise BoundViolation(name, lhs, rhs, detail)


def handle_lab_exception(exc, context=None):
    """
    Map an exception raised by an experiment to (exit_code, payload)
    """
    context = context or {}
    if isinstance(exc, BoundViolation):
        payload = {
            'success': False,
            'message': 'A certified bound failed',
            'errors': {'inequality': exc.name, 'lhs': exc.lhs, 'rhs': exc.rhs, 'detail': str(exc)},
        }
        return exc.exit_code, payload
    if isinstance(exc, ConfigError):
        payload = {
            'success': False,
            'message': str(exc),
            'errors': exc.errors if exc.errors is not None else str(exc),
        }
        return exc.exit_code, payload
    if isinstance(exc, ValidationError):
        return EXIT_CONFIG_ERROR, {
            'success': False,
            'message': 'Invalid configuration',
            'errors': exc.detail,
        }
    if isinstance(exc, (ValueError, FileNotFoundError)) and context.get('phase') == 'config':
        return EXIT_CONFIG_ERROR, {
            'success': False,
            'message': 'Invalid configuration',
            'errors': str(exc),
        }
    logger.error(f"Unhandled exception in {context.get('command', 'experiment')}: {str(exc)}")
    return EXIT_BOUND_VIOLATION, {
        'success': False,
        'message': 'An internal error occurred',
        'error': str(exc),
    }
