"""
Named targets used by the experiments and the test suite.
"""
import logging
import os
from typing import Callable, Dict

import numpy as np

from .circle_geometry import TWO_PI, UNIFORM, CircleFunction, DataMeasure, PiecewiseTrig, TrigSeries, loads_pwt

logger = logging.getLogger(__name__)


def step_half() -> PiecewiseTrig:
    return PiecewiseTrig.from_terms([(0.0, np.pi, 1.0, 0.0, 0.0)])


def half_x1() -> PiecewiseTrig:
    """I{x₂ ≥ 0}·x₁."""
    return PiecewiseTrig.from_terms([(0.0, np.pi, 0.0, 1.0, 0.0)])


def narrow_step() -> PiecewiseTrig:
    return PiecewiseTrig.from_terms([(0.3, 0.4, 0.8, 0.0, 0.0)])


def two_level() -> PiecewiseTrig:
    third = TWO_PI / 3.0
    return PiecewiseTrig.from_terms([
        (0.0, third, 0.5, 0.0, 0.0),
        (third, third, -0.5, 0.0, 0.0),
        (2.0 * third, third, 0.25, 0.0, 0.0),
    ])


def clipped_cos() -> PiecewiseTrig:
    """σ(x₁)."""
    return PiecewiseTrig.from_terms([(-0.5 * np.pi, np.pi, 0.0, 1.0, 0.0)])


def clipped_linear_mix() -> PiecewiseTrig:
    """σ(x₁) − ½σ(−x₂)."""
    return PiecewiseTrig.from_terms([(-0.5 * np.pi, np.pi, 0.0, 1.0, 0.0), (np.pi, np.pi, 0.0, 0.0, 0.5)])


def random_pieces(seed: int = 7, pieces: int = 6) -> PiecewiseTrig:
    rng = np.random.default_rng(seed)
    cuts = np.sort(rng.uniform(0.0, TWO_PI, pieces))
    widths = np.diff(np.append(cuts, cuts[0] + TWO_PI))
    coeffs = rng.uniform(-0.4, 0.4, (pieces, 3))
    return PiecewiseTrig.from_terms([(s, w, *c) for s, w, c in zip(cuts, widths, coeffs)])


def cos_theta() -> PiecewiseTrig:
    return PiecewiseTrig.linear((1.0, 0.0))


def sin_shift() -> PiecewiseTrig:
    return PiecewiseTrig.from_terms([(0.0, TWO_PI, 0.3, 0.0, 0.6)])


def cos2() -> TrigSeries:
    return TrigSeries.from_terms(cos_terms={2: 1.0})


def trig_mix() -> TrigSeries:
    return TrigSeries.from_terms(sin_terms={3: 0.4}, cos_terms={1: 0.2, 2: 0.3})


def mixture() -> PiecewiseTrig:
    return 0.5 * step_half() + 0.5 * clipped_cos()


CORPUS: Dict[str, Callable[[], CircleFunction]] = {
    'step_half': step_half,
    'half_x1': half_x1,
    'narrow_step': narrow_step,
    'two_level': two_level,
    'clipped_cos': clipped_cos,
    'clipped_linear_mix': clipped_linear_mix,
    'random_pieces': random_pieces,
    'cos_theta': cos_theta,
    'sin_shift': sin_shift,
    'cos2': cos2,
    'trig_mix': trig_mix,
    'mixture': mixture,
}

# symmetric plus linear members
L_AL_NAMES = ('half_x1', 'clipped_cos', 'cos_theta', 'sin_shift', 'cos2')

SMOOTH_NAMES = ('cos_theta', 'sin_shift', 'cos2', 'trig_mix')


def resolve_target(spec: str) -> CircleFunction:
    """
    A target from a `.pwt` path, a corpus name, or inline pieces
    'start width c0 c1 c2' separated by ';'.
    """
    spec = spec.strip()
    if spec in CORPUS:
        return CORPUS[spec]()
    if spec.endswith('.pwt') or os.path.isfile(spec):
        if not os.path.isfile(spec):
            raise FileNotFoundError(f"target file not found: {spec}")
        logger.info(f"loading target from {spec}")
        with open(spec, 'r', encoding='utf-8') as handle:
            return loads_pwt(handle.read())
    if len(spec.replace(';', ' ').split()) % 5 == 0 and spec:
        return loads_pwt(spec)
    raise ValueError(f"unknown target {spec!r}: expected a .pwt path, a corpus name or inline pieces")


def resolve_measure(spec: str, seed: int) -> DataMeasure:
    """'uniform', 'grid:N' (N equally spaced atoms) or 'random:N' (N atoms drawn from the seed)."""
    spec = spec.strip().lower()
    if spec == 'uniform':
        return UNIFORM
    kind, _, count = spec.partition(':')
    if kind not in ('grid', 'random') or not count.isdigit() or int(count) < 1:
        raise ValueError(f"unknown measure {spec!r}: expected 'uniform', 'grid:N' or 'random:N'")
    n = int(count)
    if kind == 'grid':
        return DataMeasure.discrete(TWO_PI * np.arange(n) / n)
    rng = np.random.default_rng(seed)
    return DataMeasure.discrete(np.sort(rng.uniform(0.0, TWO_PI, n)))
