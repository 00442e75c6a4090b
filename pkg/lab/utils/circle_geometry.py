"""
Exact arithmetic for functions on the unit circle.

Integrals over the circle are averaged, (1/2π)∫, and every piece of a
PiecewiseTrig is closed at its start angle and open at its end, so that
I{t ≥ 0} and σ′(0) = 1 agree with the evaluation convention.
"""
import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq, minimize_scalar

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
BOUNDARY_TOL = 1e-14
PARTITION_TOL = 1e-12


def wrap_angle(theta):
    """Reduce angles to [0, 2π)."""
    wrapped = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    return np.where(wrapped >= TWO_PI, 0.0, wrapped)


def direction_angle(direction) -> float:
    direction = np.asarray(direction, dtype=float)
    return float(wrap_angle(np.arctan2(direction[1], direction[0])))


def half_circle_start(direction) -> float:
    """Start angle of the closed half-circle {x : direction·x ≥ 0}."""
    return float(wrap_angle(direction_angle(direction) - 0.5 * np.pi))


def _raw_moments(start, width):
    """Unnormalized ∫ over [start, start+width] of 1, c, s, c², cs, s²."""
    start = np.asarray(start, dtype=float)
    width = np.asarray(width, dtype=float)
    total = 2.0 * start + width
    mid = start + 0.5 * width
    half_sin = np.sin(0.5 * width)
    sin_w = np.sin(width)
    cos_total = np.cos(total)
    return np.stack([
        width,
        2.0 * np.cos(mid) * half_sin,
        2.0 * np.sin(mid) * half_sin,
        0.5 * (width + cos_total * sin_w),
        0.5 * sin_w * np.sin(total),
        0.5 * (width - cos_total * sin_w),
    ], axis=-1)


def _trig_integrals(starts, widths, orders):
    """∫ sin(jθ) and ∫ cos(jθ) over each arc, shape (len(starts), len(orders))."""
    starts = np.asarray(starts, dtype=float)[:, None]
    widths = np.asarray(widths, dtype=float)[:, None]
    orders = np.asarray(orders, dtype=float)[None, :]
    zero = orders == 0
    safe = np.where(zero, 1.0, orders)
    phase = (starts + 0.5 * widths) * orders
    half = np.sin(0.5 * widths * orders)
    sin_int = np.where(zero, 0.0, 2.0 * np.sin(phase) * half / safe)
    cos_int = np.where(zero, widths, 2.0 * np.cos(phase) * half / safe)
    return sin_int, cos_int


def _product_coeffs(f, g):
    """Coefficients of (f0 + f1 c + f2 s)(g0 + g1 c + g2 s) on 1, c, s, c², cs, s²."""
    f0, f1, f2 = f[..., 0], f[..., 1], f[..., 2]
    g0, g1, g2 = g[..., 0], g[..., 1], g[..., 2]
    return np.stack([
        f0 * g0,
        f0 * g1 + f1 * g0,
        f0 * g2 + f2 * g0,
        f1 * g1,
        f1 * g2 + f2 * g1,
        f2 * g2,
    ], axis=-1)


def _dedupe_breaks(cuts) -> np.ndarray:
    cuts = np.sort(wrap_angle(np.asarray(cuts, dtype=float).reshape(-1)))
    if cuts.size == 0:
        return cuts
    keep = np.concatenate([[True], np.diff(cuts) > BOUNDARY_TOL])
    cuts = cuts[keep]
    if cuts.size > 1 and cuts[0] + TWO_PI - cuts[-1] <= BOUNDARY_TOL:
        cuts = cuts[:-1]
    return cuts


@dataclass(frozen=True)
class Arc:
    start: float
    width: float

    def __post_init__(self):
        width = float(self.width)
        if not (0.0 < width <= TWO_PI + PARTITION_TOL):
            raise ValueError(f"Arc width must lie in (0, 2π], got {width}")
        object.__setattr__(self, 'start', float(wrap_angle(self.start)))
        object.__setattr__(self, 'width', min(width, TWO_PI))

    @property
    def end(self) -> float:
        return self.start + self.width

    @property
    def midpoint(self) -> float:
        return float(wrap_angle(self.start + 0.5 * self.width))

    def contains(self, theta) -> np.ndarray:
        offset = wrap_angle(np.asarray(theta, dtype=float) - self.start)
        return (offset < self.width) | (self.width >= TWO_PI)


def arc_moments(arc: Arc) -> Tuple[float, float, float, float, float, float]:
    """
    Averaged moments (M1, Mc, Ms, Mcc, Mcs, Mss) of an arc.

    :param arc: the arc to integrate over
    :return: (1/2π)∫_arc of 1, cosθ, sinθ, cos²θ, cosθ sinθ, sin²θ
    """
    return tuple(float(v) for v in _raw_moments(arc.start, arc.width) / TWO_PI)


@dataclass(frozen=True)
class TrigPiece:
    arc: Arc
    c0: float
    c1: float
    c2: float

    def evaluate(self, theta):
        theta = np.asarray(theta, dtype=float)
        return self.c0 + self.c1 * np.cos(theta) + self.c2 * np.sin(theta)


@dataclass(frozen=True, eq=False)
class PiecewiseTrig:
    """
    θ ↦ c0 + c1·cosθ + c2·sinθ on each piece.

    Piece k covers [breaks[k], breaks[k+1]); the last piece wraps around to
    breaks[0] + 2π.
    """
    __array_ufunc__ = None

    breaks: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        breaks = np.array(self.breaks, dtype=float).reshape(-1)
        coeffs = np.array(self.coeffs, dtype=float).reshape(-1, 3)
        if breaks.size == 0 or breaks.size != coeffs.shape[0]:
            raise ValueError("PiecewiseTrig needs one coefficient row per break")
        if breaks[0] < 0.0 or breaks[-1] >= TWO_PI or np.any(np.diff(breaks) <= 0.0):
            raise ValueError("PiecewiseTrig breaks must increase strictly inside [0, 2π)")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("PiecewiseTrig coefficients must be finite")
        breaks.flags.writeable = False
        coeffs.flags.writeable = False
        object.__setattr__(self, 'breaks', breaks)
        object.__setattr__(self, 'coeffs', coeffs)

    @classmethod
    def zero(cls) -> 'PiecewiseTrig':
        return cls(np.zeros(1), np.zeros((1, 3)))

    @classmethod
    def constant(cls, value: float) -> 'PiecewiseTrig':
        return cls(np.zeros(1), [[value, 0.0, 0.0]])

    @classmethod
    def linear(cls, b) -> 'PiecewiseTrig':
        """The linear function x ↦ b·x, i.e. b1 cosθ + b2 sinθ."""
        return cls(np.zeros(1), [[0.0, b[0], b[1]]])

    @classmethod
    def from_terms(cls, terms: Iterable[Sequence[float]]) -> 'PiecewiseTrig':
        """
        Sum of arc-supported terms.

        :param terms: rows (start, width, c0, c1, c2); each row contributes its
            trig coefficients on [start, start + width) and zero elsewhere
        :return: canonical PiecewiseTrig of the sum
        """
        rows = np.asarray(list(terms), dtype=float).reshape(-1, 5)
        if rows.shape[0] == 0:
            return cls.zero()
        starts = wrap_angle(rows[:, 0])
        widths = rows[:, 1]
        full = widths >= TWO_PI - BOUNDARY_TOL
        cuts = np.concatenate([starts[~full], starts[~full] + widths[~full]])
        breaks = _dedupe_breaks(cuts)
        if breaks.size == 0:
            breaks = np.zeros(1)
        sub_widths = np.diff(np.append(breaks, breaks[0] + TWO_PI))
        mids = breaks + 0.5 * sub_widths
        offsets = wrap_angle(mids[:, None] - starts[None, :])
        inside = (offsets < widths[None, :]) | full[None, :]
        coeffs = inside.astype(float) @ rows[:, 2:]
        return cls._canonical(breaks, coeffs)

    @classmethod
    def from_pieces(cls, pieces: Sequence[TrigPiece]) -> 'PiecewiseTrig':
        if not pieces:
            raise ValueError("at least one piece is required")
        total = sum(piece.arc.width for piece in pieces)
        if abs(total - TWO_PI) > PARTITION_TOL:
            raise ValueError(f"piece widths sum to {total!r}, not 2π")
        order = sorted(range(len(pieces)), key=lambda i: pieces[i].arc.start)
        ordered = [pieces[i] for i in order]
        for current, following in zip(ordered, ordered[1:] + ordered[:1]):
            gap = wrap_angle(following.arc.start - current.arc.end)
            if min(gap, TWO_PI - gap) > PARTITION_TOL:
                raise ValueError(f"pieces do not tile the circle near angle {current.arc.end!r}")
        breaks = np.array([piece.arc.start for piece in ordered])
        coeffs = np.array([[piece.c0, piece.c1, piece.c2] for piece in ordered])
        return cls._canonical(breaks, coeffs)

    @classmethod
    def _canonical(cls, breaks, coeffs) -> 'PiecewiseTrig':
        coeffs = np.asarray(coeffs, dtype=float)
        if breaks.size == 1:
            return cls(np.zeros(1), coeffs)
        keep = np.any(coeffs != np.roll(coeffs, 1, axis=0), axis=1)
        if not np.any(keep):
            return cls(np.zeros(1), coeffs[:1])
        return cls(breaks[keep], coeffs[keep])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(np.append(self.breaks, self.breaks[0] + TWO_PI))

    @property
    def pieces(self) -> List[TrigPiece]:
        return [
            TrigPiece(Arc(start, width), *row)
            for start, width, row in zip(self.breaks, self.widths, self.coeffs)
        ]

    def terms(self) -> np.ndarray:
        return np.column_stack([self.breaks, self.widths, self.coeffs])

    def locate(self, theta) -> np.ndarray:
        """Index of the piece containing each angle (right-continuous)."""
        idx = np.searchsorted(self.breaks, wrap_angle(theta), side='right') - 1
        return np.where(idx < 0, self.breaks.size - 1, idx)

    def evaluate(self, theta):
        theta = np.asarray(theta, dtype=float)
        c = self.coeffs[self.locate(theta)]
        return c[..., 0] + c[..., 1] * np.cos(theta) + c[..., 2] * np.sin(theta)

    def antipodal(self) -> 'PiecewiseTrig':
        """θ ↦ f(θ + π)."""
        rows = self.terms()
        rows[:, 0] = rows[:, 0] - np.pi
        rows[:, 3:] = -rows[:, 3:]
        return PiecewiseTrig.from_terms(rows)

    def arc_integrals(self, starts, widths) -> np.ndarray:
        """
        Averaged ∫ over many arcs of f·(1, cosθ, sinθ), shape (n, 3).

        Arcs are given by start angles and widths in [0, 2π]; the computation
        uses a cumulative table from angle 0, so its cost is one lookup per arc.
        """
        starts = wrap_angle(np.asarray(starts, dtype=float).reshape(-1))
        widths = np.asarray(widths, dtype=float).reshape(-1)
        seg_starts, seg_coeffs, cumulative, period = self._cumulative_table()

        def primitive(theta):
            turns = np.floor(theta / TWO_PI)
            local = theta - turns * TWO_PI
            idx = np.clip(np.searchsorted(seg_starts, local, side='right') - 1, 0, seg_starts.size - 1)
            partial = _raw_moments(seg_starts[idx], local - seg_starts[idx])
            inner = self._weighted_moments(seg_coeffs[idx], partial)
            return cumulative[idx] + inner + turns[:, None] * period

        return (primitive(starts + widths) - primitive(starts)) / TWO_PI

    def _cumulative_table(self):
        seg_starts = _dedupe_breaks(np.append(self.breaks, 0.0))
        seg_widths = np.diff(np.append(seg_starts, TWO_PI))
        seg_coeffs = self.coeffs[self.locate(seg_starts + 0.5 * seg_widths)]
        pieces = self._weighted_moments(seg_coeffs, _raw_moments(seg_starts, seg_widths))
        cumulative = np.vstack([np.zeros(3), np.cumsum(pieces, axis=0)[:-1]])
        return seg_starts, seg_coeffs, cumulative, pieces.sum(axis=0)

    @staticmethod
    def _weighted_moments(coeffs, moments):
        # ∫ (c0 + c1 c + c2 s)·(1, c, s) from the six raw moments
        c0, c1, c2 = coeffs[:, 0:1], coeffs[:, 1:2], coeffs[:, 2:3]
        m1, mc, ms, mcc, mcs, mss = (moments[:, i:i + 1] for i in range(6))
        return np.hstack([
            c0 * m1 + c1 * mc + c2 * ms,
            c0 * mc + c1 * mcc + c2 * mcs,
            c0 * ms + c1 * mcs + c2 * mss,
        ])

    def __add__(self, other):
        if isinstance(other, PiecewiseTrig):
            return PiecewiseTrig.from_terms(np.vstack([self.terms(), other.terms()]))
        if np.isscalar(other):
            return self + PiecewiseTrig.constant(float(other))
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return PiecewiseTrig(self.breaks, -self.coeffs)

    def __sub__(self, other):
        if isinstance(other, PiecewiseTrig) or np.isscalar(other):
            return self + (-other)
        return NotImplemented

    def __mul__(self, scale):
        if not np.isscalar(scale):
            return NotImplemented
        if scale == 0:
            return PiecewiseTrig.zero()
        return PiecewiseTrig(self.breaks, float(scale) * self.coeffs)

    __rmul__ = __mul__

    def __repr__(self):
        return f"PiecewiseTrig(pieces={self.breaks.size})"


@dataclass(frozen=True, eq=False)
class TrigSeries:
    """
    Finite trigonometric polynomial y(θ) = Σ_k a_k sin kθ + b_k cos kθ.

    Heat-smoothed targets and trigonometric corpus targets live here; they are
    not piecewise of degree one.
    """
    __array_ufunc__ = None

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float).reshape(-1)
        b = np.array(self.b, dtype=float).reshape(-1)
        size = max(a.size, b.size, 1)
        a = np.pad(a, (0, size - a.size))
        b = np.pad(b, (0, size - b.size))
        a[0] = 0.0
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, 'a', a)
        object.__setattr__(self, 'b', b)

    @classmethod
    def from_terms(cls, sin_terms=None, cos_terms=None) -> 'TrigSeries':
        """Build from {k: coefficient} maps."""
        sin_terms = sin_terms or {}
        cos_terms = cos_terms or {}
        degree = max([0, *sin_terms.keys(), *cos_terms.keys()])
        a = np.zeros(degree + 1)
        b = np.zeros(degree + 1)
        for k, value in sin_terms.items():
            a[k] = value
        for k, value in cos_terms.items():
            b[k] = value
        return cls(a, b)

    @property
    def degree(self) -> int:
        return self.a.size - 1

    @property
    def orders(self) -> np.ndarray:
        return np.arange(self.a.size, dtype=float)

    def truncated(self, K: int) -> 'TrigSeries':
        a = np.zeros(K + 1)
        b = np.zeros(K + 1)
        n = min(K + 1, self.a.size)
        a[:n] = self.a[:n]
        b[:n] = self.b[:n]
        return TrigSeries(a, b)

    def derivative(self, order: int = 1) -> 'TrigSeries':
        series = self
        for _ in range(order):
            k = series.orders
            series = TrigSeries(-k * series.b, k * series.a)
        return series

    def evaluate(self, theta):
        theta = np.asarray(theta, dtype=float)
        flat = theta.reshape(-1)
        out = np.empty(flat.size)
        k = self.orders
        for lo in range(0, flat.size, 2048):
            phase = np.outer(flat[lo:lo + 2048], k)
            out[lo:lo + 2048] = np.sin(phase) @ self.a + np.cos(phase) @ self.b
        return out.reshape(theta.shape)

    def sample(self, n: int) -> np.ndarray:
        """Values at θ_j = 2πj/n via an inverse real FFT (n > 2·degree)."""
        if n <= 2 * self.degree:
            raise ValueError(f"grid of {n} points cannot resolve degree {self.degree}")
        spectrum = np.zeros(n // 2 + 1, dtype=complex)
        spectrum[0] = n * self.b[0]
        spectrum[1:self.a.size] = 0.5 * n * (self.b[1:] - 1j * self.a[1:])
        return np.fft.irfft(spectrum, n=n)

    def dense_grid_size(self) -> int:
        return int(2 ** np.ceil(np.log2(max(4096, 64 * (self.degree + 1)))))

    def norm_sq(self) -> float:
        return float(self.b[0] ** 2 + 0.5 * np.sum(self.a[1:] ** 2 + self.b[1:] ** 2))

    def sup_bound(self, order: int = 0) -> Tuple[float, float]:
        """
        Dense-sampling estimate of sup|y^(order)| and a certified upper bound.

        On each grid cell [θ_j, θ_j + h] the interpolation margin is h²/8 times
        a bound on |y″|, taken from the third-order expansion of y″ at θ_j with
        a coefficient bound on the fifth derivative as remainder.
        """
        series = self.derivative(order)
        n = series.dense_grid_size()
        h = TWO_PI / n
        values = np.abs(series.sample(n))
        estimate = float(np.max(values))
        d2, d3, d4 = (np.abs(series.derivative(j).sample(n)) for j in (2, 3, 4))
        k = series.orders
        fifth = float(np.sum(k ** 5 * (np.abs(series.a) + np.abs(series.b))))
        curvature = d2 + h * d3 + h ** 2 / 2.0 * d4 + h ** 3 / 6.0 * fifth
        cell_max = np.maximum(values, np.roll(values, -1))
        return estimate, float(np.max(cell_max + h ** 2 / 8.0 * curvature))

    def critical_points(self) -> np.ndarray:
        """Sign changes of y′ on the dense grid, refined with Brent's method."""
        slope = self.derivative()
        if not np.any(slope.a) and not np.any(slope.b):
            return np.zeros(0)
        n = self.dense_grid_size()
        grid = TWO_PI * np.arange(n + 1) / n
        values = np.append(slope.sample(n), 0.0)
        values[-1] = values[0]
        roots = list(grid[:-1][values[:-1] == 0.0])
        change = np.nonzero(values[:-1] * values[1:] < 0.0)[0]
        scalar = lambda t: float(slope.evaluate(np.array([t]))[0])
        for i in change:
            roots.append(brentq(scalar, grid[i], grid[i + 1], xtol=1e-15))
        return np.sort(wrap_angle(np.array(roots)))

    def arc_integrals(self, starts, widths) -> np.ndarray:
        """Averaged ∫ over each arc of y·(1, cosθ, sinθ), shape (n, 3)."""
        starts = np.asarray(starts, dtype=float).reshape(-1)
        widths = np.asarray(widths, dtype=float).reshape(-1)
        k = self.orders
        s_k, c_k = _trig_integrals(starts, widths, k)
        s_up, c_up = _trig_integrals(starts, widths, k + 1)
        s_dn, c_dn = _trig_integrals(starts, widths, k - 1)
        plain = s_k @ self.a + c_k @ self.b
        with_cos = 0.5 * ((s_up + s_dn) @ self.a + (c_dn + c_up) @ self.b)
        with_sin = 0.5 * ((c_dn - c_up) @ self.a + (s_up - s_dn) @ self.b)
        return np.column_stack([plain, with_cos, with_sin]) / TWO_PI

    def _binary(self, other, sign):
        if np.isscalar(other):
            other = TrigSeries(np.zeros(1), [float(other)])
        if not isinstance(other, TrigSeries):
            return NotImplemented
        size = max(self.a.size, other.a.size)
        lhs, rhs = self.truncated(size - 1), other.truncated(size - 1)
        return TrigSeries(lhs.a + sign * rhs.a, lhs.b + sign * rhs.b)

    def __add__(self, other):
        return self._binary(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, -1.0)

    def __neg__(self):
        return TrigSeries(-self.a, -self.b)

    def __mul__(self, scale):
        if not np.isscalar(scale):
            return NotImplemented
        return TrigSeries(float(scale) * self.a, float(scale) * self.b)

    __rmul__ = __mul__

    def __repr__(self):
        return f"TrigSeries(degree={self.degree})"


CircleFunction = Union[PiecewiseTrig, TrigSeries]


@dataclass(frozen=True, eq=False)
class DataMeasure:
    """Uniform measure on S¹ (angles is None) or a discrete measure on atoms."""
    angles: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.angles is None:
            return
        angles = np.array(self.angles, dtype=float).reshape(-1)
        if self.weights is None:
            weights = np.full(angles.size, 1.0 / max(angles.size, 1))
        else:
            weights = np.array(self.weights, dtype=float).reshape(-1)
        if angles.size == 0 or weights.size != angles.size:
            raise ValueError("a discrete measure needs one weight per atom")
        if np.any(weights < 0.0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"atom weights must be nonnegative and sum to 1, got {weights.sum()!r}")
        angles.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, 'angles', angles)
        object.__setattr__(self, 'weights', weights)

    @classmethod
    def uniform(cls) -> 'DataMeasure':
        return cls()

    @classmethod
    def discrete(cls, angles, weights=None) -> 'DataMeasure':
        return cls(np.asarray(angles, dtype=float), None if weights is None else np.asarray(weights, dtype=float))

    @property
    def is_uniform(self) -> bool:
        return self.angles is None

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([np.cos(self.angles), np.sin(self.angles)])

    def __repr__(self):
        return "Uniform" if self.is_uniform else f"Discrete(atoms={self.angles.size})"


UNIFORM = DataMeasure.uniform()


def fourier_coeffs(f: CircleFunction, K: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Coefficients a_k, b_k, k = 0..K, of f = Σ a_k sin kθ + b_k cos kθ.

    b_0 is the mean; for k ≥ 1, (1/2π)∫ f sin kθ = a_k / 2.
    """
    if K < 0:
        raise ValueError("K must be nonnegative")
    if isinstance(f, TrigSeries):
        series = f.truncated(K)
        return series.a.copy(), series.b.copy()
    k = np.arange(K + 1, dtype=float)
    starts, widths = f.breaks, f.widths
    s_k, c_k = _trig_integrals(starts, widths, k)
    s_up, c_up = _trig_integrals(starts, widths, k + 1)
    s_dn, c_dn = _trig_integrals(starts, widths, k - 1)
    c0, c1, c2 = f.coeffs[:, 0:1], f.coeffs[:, 1:2], f.coeffs[:, 2:3]
    sin_part = c0 * s_k + 0.5 * c1 * (s_up + s_dn) + 0.5 * c2 * (c_dn - c_up)
    cos_part = c0 * c_k + 0.5 * c1 * (c_dn + c_up) + 0.5 * c2 * (s_up - s_dn)
    a = sin_part.sum(axis=0) / np.pi
    b = cos_part.sum(axis=0) / np.pi
    a[0] = 0.0
    b[0] = cos_part[:, 0].sum() / TWO_PI
    return a, b


def inner_product(f: CircleFunction, g: CircleFunction, measure: DataMeasure = UNIFORM) -> float:
    """
    ⟨f, g⟩ in L²(μ).

    Uniform: exact integration of degree-two trig products on the common
    partition (or Parseval when a TrigSeries is involved). Discrete: weighted
    sum of pointwise products, atoms on a boundary taking the piece that
    starts there.
    """
    if not measure.is_uniform:
        return float(np.sum(measure.weights * f.evaluate(measure.angles) * g.evaluate(measure.angles)))
    if isinstance(f, TrigSeries) or isinstance(g, TrigSeries):
        K = max(s.degree for s in (f, g) if isinstance(s, TrigSeries))
        fa, fb = fourier_coeffs(f, K)
        ga, gb = fourier_coeffs(g, K)
        return float(fb[0] * gb[0] + 0.5 * np.sum(fa[1:] * ga[1:] + fb[1:] * gb[1:]))
    breaks = _dedupe_breaks(np.concatenate([f.breaks, g.breaks]))
    widths = np.diff(np.append(breaks, breaks[0] + TWO_PI))
    mids = breaks + 0.5 * widths
    products = _product_coeffs(f.coeffs[f.locate(mids)], g.coeffs[g.locate(mids)])
    return float(np.sum(np.sum(products * _raw_moments(breaks, widths), axis=1)) / TWO_PI)


def norm(f: CircleFunction, measure: DataMeasure = UNIFORM) -> float:
    if isinstance(f, TrigSeries) and measure.is_uniform:
        return float(np.sqrt(f.norm_sq()))
    return float(np.sqrt(max(inner_product(f, f, measure), 0.0)))


def sym_decompose(f: CircleFunction) -> Tuple[CircleFunction, CircleFunction]:
    """Split f into f_s(θ) = (f(θ) + f(θ+π))/2 and f_a = (f(θ) − f(θ+π))/2."""
    if isinstance(f, TrigSeries):
        even = (np.arange(f.a.size) % 2) == 0
        return TrigSeries(f.a * even, f.b * even), TrigSeries(f.a * ~even, f.b * ~even)
    flipped = f.antipodal()
    return 0.5 * (f + flipped), 0.5 * (f - flipped)


def _piece_profile(start: float, width: float, c) -> np.ndarray:
    """Values at the piece ends and at the interior critical points, in order."""
    c0, c1, c2 = c
    points = [start]
    if c1 != 0.0 or c2 != 0.0:
        phase = np.arctan2(c2, c1)
        t = phase + np.pi * np.ceil((start - phase) / np.pi)
        while t < start + width:
            if t > start:
                points.append(t)
            t += np.pi
    points.append(start + width)
    points = np.array(points)
    return c0 + c1 * np.cos(points) + c2 * np.sin(points)


def bv_norm(f: CircleFunction) -> Tuple[float, float, float]:
    """
    :param f: function on the circle
    :return: (sup, variation, sup + variation), variation averaged over 2π
    """
    if isinstance(f, TrigSeries):
        critical = f.critical_points()
        if critical.size == 0:
            sup = abs(float(f.b[0]))
            return sup, 0.0, sup
        values = f.evaluate(critical)
        variation = float(np.sum(np.abs(np.diff(np.append(values, values[0]))))) / TWO_PI
        sup = max(float(np.max(np.abs(values))), f.sup_bound()[0])
        return sup, variation, sup + variation
    sup = 0.0
    total = 0.0
    ends = []
    starts = []
    for start, width, c in zip(f.breaks, f.widths, f.coeffs):
        profile = _piece_profile(start, width, c)
        sup = max(sup, float(np.max(np.abs(profile))))
        total += float(np.sum(np.abs(np.diff(profile))))
        starts.append(profile[0])
        ends.append(profile[-1])
    if f.breaks.size > 1:
        total += float(np.sum(np.abs(np.array(starts) - np.roll(np.array(ends), 1))))
    variation = total / TWO_PI
    return sup, variation, sup + variation


def indicator_count(directions, theta) -> np.ndarray:
    """Σ_i I{ŵ_i·x ≥ 0} at the given angles."""
    directions = np.asarray(directions, dtype=float).reshape(-1, 2)
    theta = np.asarray(theta, dtype=float)
    points = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    return np.sum(points @ directions.T >= 0.0, axis=-1)


def sectors(directions) -> List[Arc]:
    """
    Arc partition on which Σ_i I{ŵ_i·x ≥ 0} is constant.

    Boundaries sit at φ_i ± π/2; coinciding boundaries are merged and logged.
    """
    directions = np.asarray(directions, dtype=float).reshape(-1, 2)
    if directions.shape[0] == 0:
        raise ValueError("sectors need at least one direction")
    if np.any(np.linalg.norm(directions, axis=1) == 0.0):
        raise ValueError("sector directions must be nonzero")
    phases = np.arctan2(directions[:, 1], directions[:, 0])
    boundaries = _dedupe_breaks(np.concatenate([phases - 0.5 * np.pi, phases + 0.5 * np.pi]))
    if boundaries.size < 2 * directions.shape[0]:
        logger.warning(f"{2 * directions.shape[0] - boundaries.size} sector boundaries collapsed")
    widths = np.diff(np.append(boundaries, boundaries[0] + TWO_PI))
    return [Arc(start, width) for start, width in zip(boundaries, widths)]


def coercivity_ratio(width: float, v_angle: Optional[float] = None) -> float:
    """
    (1/2π)∫_S (v·x)² / |S|³ for an arc centred at 0, unit v at v_angle.

    With v_angle None the least favourable v is used (smallest eigenvalue of
    the second-moment matrix).
    """
    _, _, _, mcc, mcs, mss = arc_moments(Arc(-0.5 * width, width))
    if v_angle is None:
        quadratic = 0.5 * (mcc + mss) - np.hypot(0.5 * (mcc - mss), mcs)
    else:
        c, s = np.cos(v_angle), np.sin(v_angle)
        quadratic = mcc * c * c + 2.0 * mcs * c * s + mss * s * s
    return float(quadratic / width ** 3)


def sector_coercivity_constant() -> float:
    """
    Largest c with (1/2π)∫_S (v·x)² ≥ c|v|²|S|³ for every arc |S| ≤ π.

    The ratio is rotation invariant, so only the width and the worst v
    matter; the minimum over widths is taken from a bounded scalar search,
    a grid, and the half-circle endpoint.
    """
    result = minimize_scalar(coercivity_ratio, bounds=(1e-3, np.pi), method='bounded',
                             options={'xatol': 1e-12})
    grid = np.linspace(1e-3, np.pi, 2001)
    candidates = [float(result.fun), coercivity_ratio(np.pi)] + [coercivity_ratio(w) for w in grid]
    return min(candidates)


def dumps_pwt(f: PiecewiseTrig) -> str:
    """One line per piece: 'start width c0 c1 c2' with 17 significant digits."""
    lines = []
    for start, width, (c0, c1, c2) in zip(f.breaks, f.widths, f.coeffs):
        lines.append(' '.join(f"{value:.17g}" for value in (start, width, c0, c1, c2)))
    return '\n'.join(lines) + '\n'


def loads_pwt(text: str) -> PiecewiseTrig:
    """Parse the piecewise text format; ';' also separates pieces."""
    pieces = []
    for raw in text.replace(';', '\n').splitlines():
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 5:
            raise ValueError(f"expected 'start width c0 c1 c2', got {raw!r}")
        start, width, c0, c1, c2 = (float(value) for value in fields)
        pieces.append(TrigPiece(Arc(start, width), c0, c1, c2))
    return PiecewiseTrig.from_pieces(pieces)
