"""
Hypothesis strategies shared by the test modules.
"""
import numpy as np
from hypothesis import strategies as st

from lab.utils.circle_geometry import TWO_PI, DataMeasure, PiecewiseTrig, norm
from lab.utils.network import ReluNetwork, SignPattern

coefficient = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False, allow_infinity=False)
angle = st.floats(min_value=0.0, max_value=TWO_PI, exclude_max=True, allow_nan=False)


@st.composite
def pieces(draw, max_terms=4):
    """PiecewiseTrig built as a sum of arc-supported degree-one terms."""
    count = draw(st.integers(min_value=1, max_value=max_terms))
    rows = []
    for _ in range(count):
        width = draw(st.floats(min_value=0.05, max_value=TWO_PI, allow_nan=False))
        rows.append((draw(angle), width, draw(coefficient), draw(coefficient), draw(coefficient)))
    return PiecewiseTrig.from_terms(rows)


@st.composite
def unit_targets(draw, max_terms=3):
    """Pieces scaled to L² norm at most one."""
    y = draw(pieces(max_terms))
    size = norm(y)
    return y * (1.0 / size) if size > 1.0 else y


@st.composite
def sign_patterns(draw, min_m=1, max_m=8):
    m = draw(st.integers(min_value=min_m, max_value=max_m))
    return SignPattern(tuple(draw(st.sampled_from((1, -1))) for _ in range(m)))


@st.composite
def networks(draw, min_m=1, max_m=8, scale=3.0):
    signs = draw(sign_patterns(min_m, max_m))
    seed = draw(st.integers(min_value=0, max_value=2 ** 32 - 1))
    weights = scale * np.random.default_rng(seed).standard_normal((signs.m, 2))
    return ReluNetwork(signs, weights)


@st.composite
def discrete_measures(draw, atoms=128):
    seed = draw(st.integers(min_value=0, max_value=2 ** 32 - 1))
    rng = np.random.default_rng(seed)
    weights = rng.uniform(0.5, 1.5, atoms)
    return DataMeasure.discrete(rng.uniform(0.0, TWO_PI, atoms), weights / weights.sum())


def dense_mean(f, n=1 << 18):
    """Midpoint-rule average of f over the circle."""
    theta = (np.arange(n) + 0.5) * TWO_PI / n
    return float(np.mean(f(theta)))
