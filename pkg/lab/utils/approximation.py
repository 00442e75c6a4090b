"""
Constructive approximation on S¹: heat smoothing, the symmetric-plus-linear
decomposition, step pairs, the universal approximation construction,
fixed-direction least squares and the weight-localization pipeline.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from utils.exception_handler import check_bound

from .circle_geometry import (
    TWO_PI, UNIFORM, Arc, CircleFunction, PiecewiseTrig, TrigSeries,
    bv_norm, fourier_coeffs, inner_product, norm, sectors, sym_decompose, wrap_angle,
)
from .cost import EnsembleCost
from .network import (
    ClosureElement, JTerm, KTerm, ReluNetwork, SignPattern,
    realize_closure, replicate, split_slope, to_piecewise, unit,
)

logger = logging.getLogger(__name__)

TAIL_BUDGET = 1e-14
DEFAULT_FOURIER_CAP = 65536
SUP_TOL = 1e-12
L_AL_TOL = 1e-10
DIRECTION_TOL = 1e-12


def distance_sq(f: CircleFunction, g: CircleFunction) -> float:
    """‖f − g‖²₂ under the uniform measure."""
    if isinstance(f, PiecewiseTrig) and isinstance(g, PiecewiseTrig):
        residual = f - g
        return max(inner_product(residual, residual), 0.0)
    value = inner_product(f, f) - 2.0 * inner_product(f, g) + inner_product(g, g)
    return max(value, 0.0)


def _linear(b, like: CircleFunction) -> CircleFunction:
    if isinstance(like, TrigSeries):
        return TrigSeries.from_terms({1: float(b[1])}, {1: float(b[0])})
    return PiecewiseTrig.linear(b)


# heat smoothing

@dataclass
class HeatSmoothing:
    r: int
    K: int
    series: TrigSeries
    bv: float
    sup_y: float
    sup: float
    sup_certified: float
    c1: float
    error: float
    tail_bound: float
    tail_certified: bool

    @property
    def c1_bound(self) -> float:
        return 5.0 * self.r * self.bv

    @property
    def error_bound(self) -> float:
        return 16.0 * self.bv ** 2 / self.r

    def checks(self) -> List[Tuple[str, float, float]]:
        return [
            ('sup', self.sup_certified, self.sup_y + SUP_TOL),
            ('c1', self.c1, self.c1_bound),
            ('l2_error', self.error, self.error_bound),
        ]

    @property
    def passed(self) -> bool:
        return all(lhs <= rhs for _, lhs, rhs in self.checks())


def heat_tail_envelope(bv: float, K: int, r: float) -> float:
    """Bound on Σ_{k>K}(a_k² + b_k²)e^{−2k²/r²} from |a_k|, |b_k| ≤ 2‖y‖_BV/k."""
    return 8.0 * bv ** 2 * np.exp(-2.0 * K ** 2 / r ** 2) / K


def heat_smooth(y: CircleFunction, r: int, K: Optional[int] = None,
                cap: int = DEFAULT_FOURIER_CAP) -> HeatSmoothing:
    """
    y_r = Σ_{k≤K}(a_k sin kθ + b_k cos kθ)e^{−k²/r²}.

    K starts at max(64, 8r) and doubles until the damped tail is certified
    below 1e-14 or the cap is reached. The L² error is the exact Parseval
    sum: the undamped tail ‖y‖² − Σ_{k≤K} plus Σ_{k≤K}(1 − e^{−k²/r²})²(a²+b²).
    """
    if int(r) != r or r < 1:
        raise ValueError(f"smoothing radius must be a positive integer, got {r}")
    r = int(r)
    sup_y, _, bv = bv_norm(y)
    K = int(K) if K is not None else max(64, 8 * r)
    tail = heat_tail_envelope(bv, K, r) if bv > 0.0 else 0.0
    while tail >= TAIL_BUDGET and 2 * K <= cap:
        K *= 2
        tail = heat_tail_envelope(bv, K, r)
        logger.warning(f"heat smoothing r={r}: Fourier cutoff raised to {K}")
    certified = tail < TAIL_BUDGET
    if not certified:
        logger.warning(f"heat smoothing r={r}: tail {tail:.3g} above budget at cap K={K}")

    a, b = fourier_coeffs(y, K)
    k = np.arange(K + 1, dtype=float)
    damp = np.exp(-k ** 2 / r ** 2)
    series = TrigSeries(a * damp, b * damp)

    weight = np.full(K + 1, 0.5)
    weight[0] = 1.0
    energy = weight * (a ** 2 + b ** 2)
    undamped_tail = max(inner_product(y, y) - float(np.sum(energy)), 0.0)
    error = undamped_tail + float(np.sum((1.0 - damp) ** 2 * energy))

    sup, sup_certified = series.sup_bound(0)
    c1 = sup_certified + series.sup_bound(1)[1]
    return HeatSmoothing(r, K, series, bv, sup_y, sup, sup_certified, c1, error, tail, certified)


# symmetric plus linear decomposition

@dataclass
class LalDecomposition:
    y1: CircleFunction
    y2: CircleFunction
    linear_coeffs: np.ndarray
    bv_y: float
    bv_y1: float

    @property
    def bv_check(self) -> Tuple[float, float]:
        return self.bv_y1, 4.0 * self.bv_y


def lal_decompose(y: CircleFunction) -> LalDecomposition:
    """
    y = y1 + y2 with y1 = y^s + l and y2 = y^a − l, where l(x) = b·x is the
    degree-one Fourier part of the antipodally odd part y^a.
    """
    symmetric, antisymmetric = sym_decompose(y)
    a, b = fourier_coeffs(antisymmetric, 1)
    coeffs = np.array([b[1], a[1]])
    linear = _linear(coeffs, y)
    y1 = symmetric + linear
    y2 = antisymmetric - linear
    decomposition = LalDecomposition(y1, y2, coeffs, bv_norm(y)[2], bv_norm(y1)[2])
    if decomposition.bv_y1 > 4.0 * decomposition.bv_y + 1e-12:
        logger.warning(f"symmetric-plus-linear part has BV {decomposition.bv_y1:.6g} > 4·{decomposition.bv_y:.6g}")
    return decomposition


def orthogonal_split_check(f: CircleFunction, y: CircleFunction) -> Tuple[float, float]:
    """(‖f − y‖², ‖f − y1‖² + ‖y2‖²); equal when f is symmetric plus linear."""
    decomposition = lal_decompose(y)
    lhs = distance_sq(f, y)
    rhs = distance_sq(f, decomposition.y1) + inner_product(decomposition.y2, decomposition.y2)
    return lhs, rhs


# step pairs

def _step_pair_terms(theta1: float, theta2: float, c: float, m: int) -> List[JTerm]:
    centre = 0.5 * (theta1 + theta2)
    half = 0.5 * (theta2 - theta1)
    v = np.sqrt(m) * c * np.array(unit(centre))
    return [
        JTerm(unit(centre + 0.5 * np.pi - half), tuple(v)),
        JTerm(unit(centre + 0.5 * np.pi + half), tuple(-v)),
    ]


def symmetric_step(theta1: float, theta2: float, c: float) -> PiecewiseTrig:
    """c·(I_{[θ₁,θ₂)} + I_{[θ₁+π,θ₂+π)})."""
    width = theta2 - theta1
    return PiecewiseTrig.from_terms([(wrap_angle(theta1), width, c, 0.0, 0.0),
                                     (wrap_angle(theta1 + np.pi), width, c, 0.0, 0.0)])


def step_pair(theta1: float, theta2: float, c: float) -> ClosureElement:
    """
    Four-node closure element equal to c·cos(θ − γ) on [θ₁, θ₂) and on its
    antipode, zero elsewhere; γ is the midpoint of the interval.
    """
    width = theta2 - theta1
    if not 0.0 < width < np.pi:
        raise ValueError(f"step width must lie in (0, π), got {width}")
    signs = SignPattern.alternating(4)
    if c == 0.0:
        return ClosureElement(signs)
    return ClosureElement(signs, tuple(_step_pair_terms(theta1, theta2, c, 4)))


def step_pair_bound(width: float, c: float) -> float:
    return c ** 2 / 1000.0 * width ** 5


def step_pair_error_series(width: float, c: float) -> float:
    """Series of (2c²/π)∫₀^{θ₀}(1 − cos θ)²dθ, θ₀ = width/2, through θ₀⁹."""
    half = 0.5 * width
    return 2.0 * c ** 2 / np.pi * (half ** 5 / 20.0 - half ** 7 / 168.0 + half ** 9 / 2880.0)


def step_pair_error(theta1: float, theta2: float, c: float) -> Tuple[float, float]:
    """Exact ‖g − step‖²₂ for the step pair, asserted against (c²/1000)(θ₂ − θ₁)⁵."""
    element = step_pair(theta1, theta2, c)
    error = distance_sq(to_piecewise(element), symmetric_step(theta1, theta2, c))
    width = theta2 - theta1
    bound = step_pair_bound(width, c)
    check_bound('step_pair', error, bound, slack=1e-15 * c ** 2 * width)
    return error, bound


# universal approximation

@dataclass
class SimpleFunction:
    v: PiecewiseTrig
    N: int
    error: float
    bound: float


def sample_symmetric_steps(y: CircleFunction, N: int) -> SimpleFunction:
    """
    v_N = Σ_k y^s(θ_k)(I_{[θ_k,θ_{k+1})} + antipode), θ_k = kπ/N, right-continuous samples.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    symmetric, _ = sym_decompose(y)
    width = np.pi / N
    nodes = np.arange(N) * width
    values = symmetric.evaluate(nodes)
    rows = [(theta, width, value, 0.0, 0.0) for theta, value in zip(nodes, values)]
    rows += [(theta + np.pi, width, value, 0.0, 0.0) for theta, value in zip(nodes, values)]
    v = PiecewiseTrig.from_terms(rows)
    error = distance_sq(v, symmetric)
    bound = np.pi ** 2 * bv_norm(y)[2] ** 2 / N
    return SimpleFunction(v, N, error, bound)


@dataclass
class UniversalApproximation:
    element: ClosureElement
    bound: float
    error: float
    N: int
    linear_coeffs: np.ndarray
    simple: Optional[SimpleFunction] = None


def universal_approx(y: CircleFunction, m: int, signs: SignPattern) -> UniversalApproximation:
    """
    g = g_l + g_s for y symmetric plus linear.

    g_l reproduces the linear part with one alternating pair of K terms.
    g_s realizes the sampled step function v_N, N = ⌊(m̲ − 1)/2⌋, by step
    pairs; neighbouring pairs share a direction, so their slopes are merged.
    """
    if signs.m != m:
        raise ValueError(f"sign pattern has {signs.m} entries, expected {m}")
    m_under = signs.m_under
    if m_under < 1:
        raise ValueError("universal approximation needs at least one alternating pair")
    decomposition = lal_decompose(y)
    off = norm(decomposition.y2)
    if off > L_AL_TOL:
        raise ValueError(f"target is not symmetric plus linear: ‖y2‖ = {off:.3g}")
    b = decomposition.linear_coeffs
    root_m = np.sqrt(m)

    k_terms = []
    if np.any(b != 0.0):
        k_terms = [KTerm(1, tuple(root_m * b)), KTerm(-1, tuple(-root_m * b))]

    N = (m_under - 1) // 2
    simple = None
    j_terms = []
    if N >= 1:
        simple = sample_symmetric_steps(y, N)
        width = np.pi / N
        values = sym_decompose(y)[0].evaluate(np.arange(N) * width)
        slopes = {}
        for k, value in enumerate(values):
            if value == 0.0:
                continue
            left, right = _step_pair_terms(k * width, (k + 1) * width, value, m)
            for index, term in ((k, left), (k + 1, right)):
                slopes[index] = slopes.get(index, np.zeros(2)) + np.array(term.v)
        for index in sorted(slopes):
            j_terms.append(JTerm(unit(index * width + 0.5 * np.pi), tuple(slopes[index])))

    element = ClosureElement(signs, tuple(j_terms), tuple(k_terms))
    error = distance_sq(to_piecewise(element), y)
    bound = 62.0 * decomposition.bv_y ** 2 / m_under
    check_bound('universal_approx', error, bound, detail=f"m_under={m_under}")
    logger.info(f"universal approximation m̲={m_under}, N={N}: error {error:.6g} <= {bound:.6g}")
    return UniversalApproximation(element, bound, error, N, b, simple)


# fixed-direction least squares

@dataclass(frozen=True)
class SlopeEntry:
    alpha: float
    u_norm: float
    alpha_ok: bool
    u_ok: bool


@dataclass(frozen=True)
class SectorSlope:
    arc: Arc
    slope_norm: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.slope_norm <= self.bound


@dataclass
class FitResult:
    element: ClosureElement
    residual_l2: float
    el_residuals: np.ndarray
    sectors: List[Arc]
    slope_report: List[SlopeEntry]
    sector_slopes: List[SectorSlope]
    linear: np.ndarray
    rank_deficient: bool
    include_linear: bool
    smooth_reference: bool = True

    @property
    def max_el_residual(self) -> float:
        return float(np.max(np.abs(self.el_residuals))) if self.el_residuals.size else 0.0


def _check_distinct(directions: np.ndarray) -> None:
    phases = np.arctan2(directions[:, 1], directions[:, 0])
    for i in range(phases.size):
        gaps = np.abs(np.angle(np.exp(1j * (phases[:i] - phases[i]))))
        if np.any(gaps <= DIRECTION_TOL):
            raise ValueError("fit directions must be pairwise distinct")


def _basis(directions: np.ndarray, include_linear: bool) -> List[PiecewiseTrig]:
    basis = []
    for direction in directions:
        start = wrap_angle(np.arctan2(direction[1], direction[0]) - 0.5 * np.pi)
        basis.append(PiecewiseTrig.from_terms([(start, np.pi, 0.0, 1.0, 0.0)]))
        basis.append(PiecewiseTrig.from_terms([(start, np.pi, 0.0, 0.0, 1.0)]))
    if include_linear:
        basis.append(PiecewiseTrig.linear((1.0, 0.0)))
        basis.append(PiecewiseTrig.linear((0.0, 1.0)))
    return basis


def _smooth_norms(y: CircleFunction) -> Tuple[float, float, bool]:
    """(‖y‖∞, ‖y‖_{C¹}, smooth); nonsmooth targets are measured through heat_smooth(y, 16)."""
    smooth = isinstance(y, TrigSeries)
    series = y if smooth else heat_smooth(y, 16).series
    sup = series.sup_bound(0)[0]
    return sup, sup + series.sup_bound(1)[0], smooth


def best_fixed_direction_fit(directions, signs: SignPattern, y: CircleFunction,
                             include_linear: bool = True,
                             norms: Optional[Tuple[float, float, bool]] = None) -> FitResult:
    """
    Least-squares closure element g = Σ I{ŵᵢ·x ≥ 0}(cᵢ·x) [+ l·x] with the
    directions held fixed.

    The Gram matrix and right-hand side are exact inner products. Stored J
    slopes are vᵢ = √m·cᵢ; the linear part becomes the K terms ±σ(±√m·l·x).

    :param directions: unit vectors ŵᵢ, shape (n, 2)
    :return: FitResult with the squared L² residual, per-sector first-order
        residuals ∫_S(g^s − y^s)x and the slope report
    """
    directions = np.asarray(directions, dtype=float).reshape(-1, 2)
    n_dirs = directions.shape[0]
    if n_dirs:
        lengths = np.linalg.norm(directions, axis=1)
        if np.any(np.abs(lengths - 1.0) > 1e-9):
            raise ValueError("fit directions must be unit vectors")
        _check_distinct(directions)
    needed = n_dirs + (1 if include_linear else 0)
    if needed > signs.m_under:
        raise ValueError(f"{n_dirs} directions{' plus linear part' if include_linear else ''} "
                         f"need {needed} alternating pairs, signs provide {signs.m_under}")

    basis = _basis(directions, include_linear)
    size = len(basis)
    gram = np.empty((size, size))
    rhs = np.empty(size)
    for i in range(size):
        rhs[i] = inner_product(basis[i], y)
        for j in range(i + 1):
            gram[i, j] = gram[j, i] = inner_product(basis[i], basis[j])
    coefficients, _, rank, _ = np.linalg.lstsq(gram, rhs, rcond=None) if size else (np.zeros(0), None, 0, None)
    rank_deficient = bool(size and rank < size)
    if rank_deficient:
        logger.warning(f"fixed-direction fit: Gram matrix of size {size} has rank {rank}; minimal-norm solution used")

    root_m = np.sqrt(signs.m)
    slopes = coefficients[:2 * n_dirs].reshape(n_dirs, 2)
    linear = coefficients[2 * n_dirs:] if include_linear else np.zeros(2)
    j_terms = tuple(JTerm(tuple(d), tuple(root_m * c)) for d, c in zip(directions, slopes))
    k_terms = ()
    if include_linear and np.any(linear != 0.0):
        k_terms = (KTerm(1, tuple(root_m * linear)), KTerm(-1, tuple(-root_m * linear)))
    element = ClosureElement(signs, j_terms, k_terms)

    g = to_piecewise(element)
    residual = distance_sq(g, y)

    arcs = sectors(directions) if n_dirs else []
    g_sym, y_sym = sym_decompose(g)[0], sym_decompose(y)[0]
    if arcs:
        starts = np.array([arc.start for arc in arcs])
        widths = np.array([arc.width for arc in arcs])
        el = g_sym.arc_integrals(starts, widths)[:, 1:] - y_sym.arc_integrals(starts, widths)[:, 1:]
    else:
        el = np.zeros((0, 2))

    sup, c1, smooth = norms if norms is not None else _smooth_norms(y)
    alpha, u = split_slope(element)
    report = [
        SlopeEntry(float(a_i), float(np.linalg.norm(u_i)),
                   abs(a_i) / root_m <= 6.0 * np.pi ** 2 * c1,
                   np.linalg.norm(u_i) / root_m <= 6.0 * np.pi ** 2 * sup)
        for a_i, u_i in zip(alpha, u)
    ]
    sector_slopes = []
    for arc in arcs:
        active = (directions @ np.array(unit(arc.midpoint))) >= 0.0
        v_sector = slopes[active].sum(axis=0) + linear
        bound = 3.0 * np.pi ** 2 * min(c1, sup / arc.width)
        sector_slopes.append(SectorSlope(arc, float(np.linalg.norm(v_sector)), bound))

    return FitResult(element, residual, el, arcs, report, sector_slopes, linear,
                     rank_deficient, include_linear, smooth)


# constrained minimization

def project_to_ball(weights: np.ndarray, radius: float) -> np.ndarray:
    length = float(np.sqrt(np.sum(weights ** 2)))
    if length <= radius:
        return weights
    return weights * (radius / length)


def constrained_minimize(net0: ReluNetwork, target: CircleFunction, measure, R_ball: float,
                         steps: int = 200) -> Tuple[ReluNetwork, float]:
    """
    Projected gradient descent on Φ over |W| ≤ R_ball with Armijo
    backtracking; returns the best iterate seen.
    """
    if not R_ball > 0.0:
        raise ValueError(f"ball radius must be positive, got {R_ball}")
    cost = EnsembleCost(net0.signs, target, measure)
    W = project_to_ball(np.array(net0.weights, dtype=float), R_ball)
    value, grad = cost.value_and_grad(W)
    best_value, best_W = float(value), W
    step = 1.0
    for _ in range(steps):
        while step > 1e-14:
            candidate = project_to_ball(W - step * grad, R_ball)
            moved = candidate - W
            candidate_value, candidate_grad = cost.value_and_grad(candidate)
            if candidate_value <= value - 1e-4 / step * float(np.sum(moved ** 2)):
                break
            step *= 0.5
        else:
            break
        if not np.any(moved):
            break
        W, value, grad = candidate, candidate_value, candidate_grad
        if value < best_value:
            best_value, best_W = float(value), W
        step = min(2.0 * step, 1e6)
    return net0.with_weights(best_W), best_value


# unconstrained surrogate

@dataclass
class SurrogateResult:
    fit: FitResult
    value: float
    phases: np.ndarray
    include_linear: bool
    candidates: int


def _jump_angles(y: CircleFunction) -> np.ndarray:
    if not isinstance(y, PiecewiseTrig) or y.breaks.size < 2:
        return np.zeros(0)
    starts = y.coeffs[:, 0] + y.coeffs[:, 1] * np.cos(y.breaks) + y.coeffs[:, 2] * np.sin(y.breaks)
    ends_at = y.breaks
    previous = np.roll(y.coeffs, 1, axis=0)
    ends = previous[:, 0] + previous[:, 1] * np.cos(ends_at) + previous[:, 2] * np.sin(ends_at)
    return y.breaks[np.abs(starts - ends) > 1e-12]


def _candidate_phase_sets(y: CircleFunction, n_dirs: int) -> List[np.ndarray]:
    if n_dirs == 0:
        return [np.zeros(0)]
    candidates = []
    for refine in (1, 2, 4):
        for shift in range(refine):
            candidates.append(wrap_angle(TWO_PI * (np.arange(n_dirs) + shift / refine) / n_dirs))
    jumps = _jump_angles(y)
    if jumps.size:
        seeded = list(wrap_angle(jumps - 0.5 * np.pi))[:n_dirs]
        fill = TWO_PI * (np.arange(2 * n_dirs) + 0.5) / (2 * n_dirs)
        for phase in fill:
            if len(seeded) >= n_dirs:
                break
            if np.all(np.abs(np.angle(np.exp(1j * (np.array(seeded) - phase)))) > 1e-6):
                seeded.append(phase)
        candidates.append(np.sort(np.array(seeded)))
    return candidates


def _fit_value(phases, signs, y, include_linear, norms) -> Tuple[float, Optional[FitResult]]:
    phases = np.asarray(phases, dtype=float)
    if phases.size > 1:
        gaps = np.abs(np.angle(np.exp(1j * (phases[:, None] - phases[None, :]))))
        np.fill_diagonal(gaps, np.inf)
        if gaps.min() <= 1e-9:
            return np.inf, None
    fit = best_fixed_direction_fit(np.column_stack([np.cos(phases), np.sin(phases)]), signs, y,
                                   include_linear, norms)
    return fit.residual_l2, fit


def unconstrained_surrogate(y: CircleFunction, m: int, signs: SignPattern, workers: int = 1,
                            refine_rounds: int = 4) -> SurrogateResult:
    """
    Best fixed-direction closure fit over a family of direction sets, refined
    by coordinate descent on the direction angles.

    Candidates: uniform grids with shifted phases and a grid seeded by the
    jump locations of y, each with the linear part (m̲ − 1 directions) and
    without it (m̲ directions). Ties go to the lower candidate index.
    """
    if signs.m != m:
        raise ValueError(f"sign pattern has {signs.m} entries, expected {m}")
    m_under = signs.m_under
    jobs = []
    for include_linear, n_dirs in ((True, m_under - 1), (False, m_under)):
        if n_dirs < 0 or (not include_linear and n_dirs == 0):
            continue
        for phases in _candidate_phase_sets(y, n_dirs):
            jobs.append((phases, include_linear))
    if not jobs:
        raise ValueError("no direction budget: the sign pattern has no alternating pair")
    norms = _smooth_norms(y)

    def evaluate(job):
        return _fit_value(job[0], signs, y, job[1], norms)[0]

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        values = list(pool.map(evaluate, jobs))
    best = int(np.argmin(values))
    phases, include_linear = np.array(jobs[best][0], dtype=float), jobs[best][1]
    value = values[best]

    if phases.size:
        delta = np.pi / (4.0 * phases.size)
        for _ in range(refine_rounds):
            for i in range(phases.size):
                for direction in (1.0, -1.0):
                    trial = phases.copy()
                    trial[i] = wrap_angle(trial[i] + direction * delta)
                    trial_value = _fit_value(trial, signs, y, include_linear, norms)[0]
                    if trial_value < value:
                        phases, value = trial, trial_value
            delta *= 0.5
    fit = _fit_value(phases, signs, y, include_linear, norms)[1]
    logger.info(f"unconstrained surrogate m={m}: {len(jobs)} candidates, value {fit.residual_l2:.6g}")
    return SurrogateResult(fit, fit.residual_l2, phases, include_linear, len(jobs))


# localization

def localization_h0(R: float, m_under: int, m: int) -> float:
    return float(R ** -0.5 * (m_under * m) ** -0.5)


def smoothing_radius(R: float) -> int:
    """Integer r with r ≤ R^{1/3} ≤ 2r."""
    root = R ** (1.0 / 3.0)
    nearest = round(root)
    if abs(root - nearest) < 1e-9 * max(root, 1.0):
        return max(int(nearest), 1)
    return max(int(np.floor(root)), 1)


def guarantee_radius(bv: float) -> float:
    return float(max((10.0 * bv) ** 6, 4e7))


def localization_bound(bv: float, R: float) -> float:
    return float(5e4 * (bv ** 2 + 1.0) * R ** (-1.0 / 9.0))


@dataclass
class LocalizationReport:
    R: float
    m: int
    m_under: int
    c_m: float
    h0: float
    r: int
    branch: str
    m_prime: int
    W_norm: float
    ball_radius: float
    feasible: bool
    realized_value: float
    constrained_value: float
    surrogate_value: float
    unconstrained_estimate: float
    gap: float
    gap_bound: float
    R0: float
    network: ReluNetwork = field(repr=False)
    infeasible_reason: str = ''

    @property
    def guarantee_regime(self) -> bool:
        return self.R >= self.R0


def _realize_small(y_r: CircleFunction, m: int, signs: SignPattern, R: float, workers: int):
    surrogate = unconstrained_surrogate(y_r, m, signs, workers)
    h0 = localization_h0(R, signs.m_under, m)
    return realize_closure(surrogate.fit.element, h0), h0


def localization_pipeline(y: CircleFunction, m: int, signs: SignPattern, R: float,
                  warm_start: Optional[ReluNetwork] = None, surrogate: Optional[SurrogateResult] = None,
                  workers: int = 1, polish_steps: int = 200) -> LocalizationReport:
    """
    Run the localization construction at radius R.

    The target is heat-smoothed at r ≈ R^{1/3}; its closure fit is realized
    at scale h₀ directly when m̲⁹ ≤ R, otherwise on m′ = 2⌊R^{1/9}⌋ nodes
    and replicated to m. The realized network (and the warm start, if any)
    are polished inside |W| ≤ C(m)R. Both the polished value and the
    surrogate for the unconstrained infimum are upper bounds; the estimate
    is their minimum so the reported gap is nonnegative.
    """
    if signs.m != m:
        raise ValueError(f"sign pattern has {signs.m} entries, expected {m}")
    if not R >= 1.0:
        raise ValueError(f"localization radius must be at least 1, got {R}")
    m_under = signs.m_under
    if m_under < 1:
        raise ValueError("localization needs at least one alternating pair")
    y_norm = norm(y)
    if y_norm > 1.0 + 1e-12:
        raise ValueError(f"target must satisfy ‖y‖₂ ≤ 1, got {y_norm:.6g}")

    bv = bv_norm(y)[2]
    r = smoothing_radius(R)
    y_r = heat_smooth(y, r).series
    c_m = signs.c_m
    ball = c_m * R
    h0 = localization_h0(R, m_under, m)
    reason = ''
    if m_under ** 9 <= R:
        branch, m_prime = 'small', m
        try:
            network, _ = _realize_small(y_r, m, signs, R, workers)
        except ValueError as exc:
            network, reason = ReluNetwork.zeros(signs), str(exc)
    else:
        branch = 'big'
        m_prime = 2 * int(np.floor(R ** (1.0 / 9.0) + 1e-12))
        small_signs = SignPattern.alternating(m_prime)
        try:
            h0 = localization_h0(R, small_signs.m_under, m_prime)
            small, _ = _realize_small(y_r, m_prime, small_signs, R, workers)
            if small.weight_norm > R:
                reason = f"reduced network norm {small.weight_norm:.6g} exceeds R"
            network = replicate(small, m, signs)
        except ValueError as exc:
            network, reason = ReluNetwork.zeros(signs), str(exc)

    W_norm = network.weight_norm
    feasible = not reason and W_norm <= ball
    if not feasible:
        reason = reason or f"|W_h0| = {W_norm:.17g} exceeds C(m)R = {ball:.17g}"
        logger.warning(f"localization R={R:g} m={m}: infeasible, {reason}")
    realized_value = distance_sq(to_piecewise(network), y)

    starts = [network]
    if warm_start is not None:
        starts.append(warm_start)
    polished = [constrained_minimize(start, y, UNIFORM, ball, polish_steps) for start in starts]
    best_net, constrained_value = min(polished, key=lambda item: item[1])

    if surrogate is None:
        surrogate = unconstrained_surrogate(y, m, signs, workers)
    estimate = min(surrogate.value, constrained_value)
    report = LocalizationReport(
        R=R, m=m, m_under=m_under, c_m=c_m, h0=h0, r=r, branch=branch, m_prime=m_prime,
        W_norm=W_norm, ball_radius=ball, feasible=feasible, realized_value=realized_value,
        constrained_value=constrained_value, surrogate_value=surrogate.value,
        unconstrained_estimate=estimate, gap=constrained_value - estimate,
        gap_bound=localization_bound(bv, R), R0=guarantee_radius(bv), network=best_net,
        infeasible_reason=reason,
    )
    logger.info(f"localization R={R:g} m={m} ({branch}): |W_h0|={W_norm:.6g}, constrained={constrained_value:.6g}, "
                f"gap={report.gap:.3g}")
    return report
