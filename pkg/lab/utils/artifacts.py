import csv
import json
import logging
import os
import platform
from importlib import metadata
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

TRACKED_PACKAGES = ('numpy', 'scipy', 'Django', 'djangorestframework', 'python-dotenv', 'hypothesis')


def format_value(value) -> str:
    """Floats with 17 significant digits so that CSV values round-trip exactly."""
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return '1' if value else '0'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    count = 0
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(value) for value in row])
            count += 1
    logger.info(f"wrote {count} rows to {path}")
    return path


def read_csv(path: str):
    with open(path, 'r', newline='', encoding='utf-8') as handle:
        return list(csv.DictReader(handle))


def write_histogram(path: str, edges, counts) -> str:
    rows = zip(edges[:-1], edges[1:], counts)
    return write_csv(path, ('bin_left', 'bin_right', 'count'), rows)


def package_versions() -> dict:
    versions = {'python': platform.python_version()}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            continue
    return versions


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return repr(value)
    return value


def write_manifest(output_dir: str, manifest: dict) -> str:
    path = os.path.join(output_dir, 'manifest.json')
    os.makedirs(output_dir, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(_jsonable(manifest), handle, indent=2, sort_keys=True)
        handle.write('\n')
    return path
