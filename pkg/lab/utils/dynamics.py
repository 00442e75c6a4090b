"""
Time evolution of network weights: deterministic gradient flow, the
divergence example, the Langevin ensemble, the one-node Fokker–Planck
solver and the Poincaré constant certificate.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import splu
from scipy.special import gammaln
from scipy.stats import linregress

from utils.exception_handler import BoundViolation, check_bound

from .circle_geometry import TWO_PI, UNIFORM, CircleFunction, DataMeasure, PiecewiseTrig
from .cost import EnsembleCost
from .network import ReluNetwork, SignPattern

logger = logging.getLogger(__name__)

EULER = 'euler'
RK4 = 'rk4'
INTEGRATORS = (EULER, RK4)

STRUCTURE_TOL = 1e-10
DROP_LIMIT = 0.01
MASS_TOL = 1e-8
DENSITY_FLOOR = 1e-16
BLOCK_SIZE = 256
FULL_HORIZON = 10.0
LOG_FLOAT_MAX = 709.0


@dataclass(frozen=True)
class FlowConfig:
    dt: float
    T: float
    integrator: str = RK4
    record_every: int = 1
    min_dt: Optional[float] = None

    def __post_init__(self):
        if not (self.dt > 0.0 and self.T > 0.0):
            raise ValueError(f"dt and T must be positive, got dt={self.dt}, T={self.T}")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"unknown integrator {self.integrator!r}, expected one of {INTEGRATORS}")
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")

    @property
    def smallest_step(self) -> float:
        return self.min_dt if self.min_dt is not None else self.dt / 1024.0


@dataclass
class FlowTrajectory:
    times: List[float] = field(default_factory=list)
    weights: List[np.ndarray] = field(default_factory=list)
    phis: List[float] = field(default_factory=list)
    halvings: int = 0
    aborted: bool = False

    def record(self, t, W, value):
        self.times.append(float(t))
        self.weights.append(np.array(W))
        self.phis.append(float(value))

    @property
    def final(self) -> np.ndarray:
        return self.weights[-1]


def _kink_points(target: CircleFunction, measure: DataMeasure) -> Optional[np.ndarray]:
    """Points of S¹ at which a change of the activation pattern changes the flow's smoothness."""
    if not measure.is_uniform:
        return measure.points
    if isinstance(target, PiecewiseTrig) and target.breaks.size > 1:
        return np.column_stack([np.cos(target.breaks), np.sin(target.breaks)])
    return None


def gradient_flow(net0: ReluNetwork, target: CircleFunction, measure: DataMeasure, cfg: FlowConfig) -> FlowTrajectory:
    """
    Integrate dW/dt = −∇Φ(W).

    The RK4 scheme halves its step (down to cfg.smallest_step) whenever a
    node's activation pattern on the kink points changes within the step.
    """
    cost = EnsembleCost(net0.signs, target, measure)
    kinks = _kink_points(target, measure)

    def pattern(W):
        return None if kinks is None else (W @ kinks.T >= 0.0)

    def drift(W):
        return -cost.value_and_grad(W)[1]

    def rk4(W, h):
        k1 = drift(W)
        k2 = drift(W + 0.5 * h * k1)
        k3 = drift(W + 0.5 * h * k2)
        k4 = drift(W + h * k3)
        return W + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    trajectory = FlowTrajectory()
    W = np.array(net0.weights, dtype=float)
    t = 0.0
    value = float(cost.value(W))
    trajectory.record(t, W, value)
    steps = 0
    while t < cfg.T * (1.0 - 1e-12):
        h = min(cfg.dt, cfg.T - t)
        if cfg.integrator == EULER:
            W_next = W + h * drift(W)
        else:
            before = pattern(W)
            while True:
                W_next = rk4(W, h)
                if before is None or h <= cfg.smallest_step or np.array_equal(pattern(W_next), before):
                    break
                h *= 0.5
                trajectory.halvings += 1
        if not np.all(np.isfinite(W_next)):
            logger.error(f"gradient flow left the finite range at t={t:.6g}; keeping last finite state")
            trajectory.aborted = True
            break
        W, t = W_next, t + h
        steps += 1
        value = float(cost.value(W))
        if steps % cfg.record_every == 0:
            trajectory.record(t, W, value)
    if trajectory.times[-1] != t:
        trajectory.record(t, W, value)
    logger.info(f"gradient flow: {steps} steps, {trajectory.halvings} halvings, Φ={value:.6g}")
    return trajectory


# divergence example

def half_plane_target() -> PiecewiseTrig:
    """y(x) = I{x₂ ≥ 0}·x₁."""
    return PiecewiseTrig.from_terms([(0.0, np.pi, 0.0, 1.0, 0.0)])


@dataclass
class DivergenceReport:
    times: np.ndarray
    b: np.ndarray
    weight_norms: np.ndarray
    phis: np.ndarray
    max_e1: float
    max_e2_gap: float
    threshold: float
    threshold_time: Optional[float]
    full_horizon: float = 0.0
    full_off_line: float = 0.0
    full_b_gap: float = 0.0

    @property
    def diverged(self) -> bool:
        return self.threshold_time is not None


def divergence_weights(b) -> np.ndarray:
    """Network weights for w₁ = (½, b), w₂ = (−½, b) with the 1/√m scale absorbed."""
    return np.sqrt(2.0) * np.array([[0.5, b], [-0.5, b]])


def divergence_experiment(b0: float, cfg: FlowConfig, threshold: float = 1e3) -> DivergenceReport:
    """
    Gradient flow from w₁ = (½, b₀), w₂ = (−½, b₀) with signs (+1, −1)
    against y = I{x₂≥0}x₁.

    The flow stays on the line (½, b, −½, b); b is integrated with an
    adaptive Runge–Kutta scheme and at every accepted step the full exact
    gradient is checked for the line structure. Over the first
    FULL_HORIZON time units the unreduced four-dimensional flow is also run
    with cfg.integrator, and its distance from the line is asserted.
    """
    if not b0 >= 1.0:
        raise ValueError(f"b0 must be at least 1, got {b0}")
    signs = SignPattern((1, -1))
    cost = EnsembleCost(signs, half_plane_target(), UNIFORM)
    scale = np.sqrt(2.0)

    def rhs(_t, state):
        grad = cost.value_and_grad(divergence_weights(state[0]))[1]
        return [-grad[0, 1] / scale]

    solution = solve_ivp(rhs, (0.0, cfg.T), [b0], method='RK45', rtol=1e-10, atol=1e-12,
                         first_step=min(cfg.dt, cfg.T))
    if not solution.success:
        raise BoundViolation('divergence_integration', 1.0, 0.0, solution.message)

    times = solution.t
    b = solution.y[0]
    weights = np.stack([divergence_weights(value) for value in b])
    phis, grads = cost.value_and_grad(weights)
    e1 = np.abs(grads[:, :, 0]).max(axis=1)
    e2_gap = np.abs(grads[:, 0, 1] - grads[:, 1, 1])
    norms = np.sqrt(np.sum(weights ** 2, axis=(1, 2)))

    worst = int(np.argmax(e1))
    check_bound('gradient_e1_component', e1[worst], STRUCTURE_TOL, detail=f"t={times[worst]:.6g}")
    worst = int(np.argmax(e2_gap))
    check_bound('gradient_e2_equal', e2_gap[worst], STRUCTURE_TOL, detail=f"t={times[worst]:.6g}")
    steps_b = np.diff(b)
    if steps_b.size and steps_b.min() <= 0.0:
        k = int(np.argmin(steps_b))
        raise BoundViolation('b_increasing', b[k], b[k + 1], f"t={times[k + 1]:.6g}")
    steps_phi = np.diff(phis)
    if steps_phi.size:
        k = int(np.argmax(steps_phi))
        check_bound('phi_decreasing', phis[k + 1], phis[k], slack=1e-14 * (1.0 + norms[k] ** 2),
                    detail=f"t={times[k + 1]:.6g}")

    crossed = np.nonzero(norms > threshold)[0]
    threshold_time = float(times[crossed[0]]) if crossed.size else None
    if threshold_time is None:
        logger.info(f"divergence: |W| reached {norms[-1]:.6g} by T={cfg.T:.6g}, below {threshold:.6g}")
    else:
        logger.info(f"divergence: |W| > {threshold:.6g} at t={threshold_time:.6g}")
    horizon = min(cfg.T, FULL_HORIZON)
    full = gradient_flow(ReluNetwork(signs, divergence_weights(b0)), half_plane_target(), UNIFORM,
                         FlowConfig(cfg.dt, horizon, cfg.integrator))
    path = np.stack(full.weights) / scale
    off_line = float(np.max(np.abs(np.concatenate([
        path[:, 0, 0] - 0.5, path[:, 1, 0] + 0.5, path[:, 0, 1] - path[:, 1, 1],
    ]))))
    check_bound('full_flow_on_invariant_line', off_line, STRUCTURE_TOL * (1.0 + horizon),
                detail=f"{cfg.integrator} over t ≤ {horizon:g}")
    reduced_b = float(solve_ivp(rhs, (0.0, horizon), [b0], method='RK45', rtol=1e-10, atol=1e-12).y[0, -1])
    b_gap = abs(float(path[-1, 0, 1]) - reduced_b)
    logger.info(f"divergence: full {cfg.integrator} flow to t={horizon:g} is {off_line:.3g} off the line, "
                f"b differs from the reduced flow by {b_gap:.3g}")
    return DivergenceReport(times, b, norms, phis, float(e1.max()), float(e2_gap.max()),
                            threshold, threshold_time, horizon, off_line, b_gap)


# Langevin ensemble

@dataclass(frozen=True)
class LangevinConfig:
    eps: float
    R: float
    dt: float
    T: float
    n_traj: int
    seed: int
    record_every: int = 100
    workers: int = 1
    block_size: int = BLOCK_SIZE

    def __post_init__(self):
        if not 0.0 < self.eps <= 1.0:
            raise ValueError(f"eps must lie in (0, 1], got {self.eps}")
        if not (self.R > 0.0 and self.dt > 0.0 and self.T > 0.0):
            raise ValueError("R, dt and T must be positive")
        if self.n_traj < 1:
            raise ValueError("n_traj must be at least 1")
        if self.record_every < 1 or self.block_size < 1 or self.workers < 1:
            raise ValueError("record_every, block_size and workers must be at least 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))


Marginal = Callable[[np.ndarray], np.ndarray]


def weight_norm_marginal(W: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(W ** 2, axis=(-2, -1)))


def coordinate_marginal(node: int, axis: int) -> Marginal:
    def marginal(W):
        return W[:, node, axis]
    return marginal


def parse_marginal(name: str) -> Marginal:
    """'wnorm' or 'w<node><x|y>', e.g. 'w0y'."""
    if name == 'wnorm':
        return weight_norm_marginal
    if len(name) >= 3 and name[0] == 'w' and name[-1] in 'xy' and name[1:-1].isdigit():
        return coordinate_marginal(int(name[1:-1]), 'xy'.index(name[-1]))
    raise ValueError(f"unknown marginal {name!r}")


def block_generator(seed: int, block: int) -> np.random.Generator:
    """Counter-based stream for one block of trajectories."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


@dataclass
class LangevinSnapshot:
    t: float
    phi_mean: float
    phi_p10: float
    phi_p90: float
    wnorm_mean: float
    wnorm_p10: float
    wnorm_p50: float
    wnorm_p90: float
    marginal_mean: Dict[str, float]
    marginal_var: Dict[str, float]
    histograms: Dict[str, np.ndarray]


@dataclass
class LangevinResult:
    snapshots: List[LangevinSnapshot]
    edges: Dict[str, np.ndarray]
    final_weights: np.ndarray
    dropped: int
    n_traj: int


def langevin_ensemble(init_sampler: Callable[[np.random.Generator, int], np.ndarray], target: CircleFunction,
                      measure: DataMeasure, cfg: LangevinConfig, signs: SignPattern,
                      histograms: Optional[Dict[str, np.ndarray]] = None) -> LangevinResult:
    """
    Euler–Maruyama for dW = −∇Φ_R(W)dt + √2·ε·dB.

    Trajectories are split into fixed-size blocks; block k draws its initial
    states and then its noise step by step from block_generator(seed, k),
    so results do not depend on how blocks are scheduled across workers.

    :param init_sampler: (generator, count) -> initial weights (count, m, 2)
    :param histograms: marginal name -> bin edges
    """
    cost = EnsembleCost(signs, target, measure)
    histograms = histograms if histograms is not None else {'wnorm': np.linspace(0.0, cfg.R + 2.0, 41)}
    marginals = {name: parse_marginal(name) for name in histograms}
    n_steps = cfg.n_steps
    noise_scale = np.sqrt(2.0 * cfg.dt) * cfg.eps
    record_steps = [step for step in range(n_steps + 1) if step % cfg.record_every == 0 or step == n_steps]

    def run_block(block):
        start = block * cfg.block_size
        count = min(cfg.block_size, cfg.n_traj - start)
        rng = block_generator(cfg.seed, block)
        W = np.array(init_sampler(rng, count), dtype=float).reshape(count, signs.m, 2)
        alive = np.ones(count, dtype=bool)
        records = []
        for step in range(n_steps + 1):
            values, grad, _, _ = cost.penalized(W, cfg.R)
            if step in record_set:
                records.append((values.copy(), W.copy(), alive.copy()))
            if step == n_steps:
                break
            noise = rng.standard_normal(W.shape)
            W = W - cfg.dt * grad + noise_scale * noise
            bad = ~np.all(np.isfinite(W), axis=(1, 2))
            if np.any(bad & alive):
                alive &= ~bad
            W[bad] = 0.0
        return records, W, alive

    record_set = set(record_steps)
    n_blocks = -(-cfg.n_traj // cfg.block_size)
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        results = list(pool.map(run_block, range(n_blocks)))

    final_alive = np.concatenate([alive for _, _, alive in results])
    dropped = int(np.count_nonzero(~final_alive))
    if dropped:
        logger.warning(f"langevin: dropped {dropped} of {cfg.n_traj} non-finite trajectories")
    check_bound('langevin_dropped_fraction', dropped / cfg.n_traj, DROP_LIMIT)

    snapshots = []
    for index, step in enumerate(record_steps):
        values = np.concatenate([records[index][0] for records, _, _ in results])
        W = np.concatenate([records[index][1] for records, _, _ in results])
        keep = final_alive
        values, W = values[keep], W[keep]
        norms = weight_norm_marginal(W)
        phi_q = np.quantile(values, [0.1, 0.9])
        norm_q = np.quantile(norms, [0.1, 0.5, 0.9])
        means, variances, counts = {}, {}, {}
        for name, marginal in marginals.items():
            sample = marginal(W)
            means[name] = float(np.mean(sample))
            variances[name] = float(np.var(sample))
            counts[name] = np.histogram(sample, bins=histograms[name])[0]
        snapshots.append(LangevinSnapshot(
            step * cfg.dt, float(np.mean(values)), float(phi_q[0]), float(phi_q[1]),
            float(np.mean(norms)), float(norm_q[0]), float(norm_q[1]), float(norm_q[2]),
            means, variances, counts,
        ))
    final_weights = np.concatenate([W for _, W, _ in results])[final_alive]
    logger.info(f"langevin: {cfg.n_traj} trajectories, {n_steps} steps, final mean Φ_R={snapshots[-1].phi_mean:.6g}")
    return LangevinResult(snapshots, {name: np.asarray(e) for name, e in histograms.items()},
                          final_weights, dropped, cfg.n_traj)


def stationary_wnorm_probabilities(target: CircleFunction, measure: DataMeasure, eps: float, R: float,
                                   edges: Sequence[float], sign: int = 1, radial: int = 400,
                                   angular: int = 360) -> np.ndarray:
    """
    Bin probabilities of |w| under the one-node density ∝ e^{−Φ_R/ε²},
    by polar quadrature over the disc of radius edges[-1].
    """
    edges = np.asarray(edges, dtype=float)
    cost = EnsembleCost(SignPattern((sign,)), target, measure)
    phases = (np.arange(angular) + 0.5) * TWO_PI / angular
    probabilities = np.zeros(edges.size - 1)
    per_bin = max(radial // (edges.size - 1), 8)
    for k in range(edges.size - 1):
        radii = edges[k] + (np.arange(per_bin) + 0.5) * (edges[k + 1] - edges[k]) / per_bin
        r, p = np.meshgrid(radii, phases, indexing='ij')
        W = np.stack([r * np.cos(p), r * np.sin(p)], axis=-1).reshape(-1, 1, 2)
        values = cost.penalized(W, R)[0].reshape(r.shape)
        density = np.exp(-values / eps ** 2) * r
        probabilities[k] = density.mean() * (edges[k + 1] - edges[k])
    return probabilities / probabilities.sum()


def total_variation(counts, probabilities) -> float:
    counts = np.asarray(counts, dtype=float)
    empirical = counts / counts.sum()
    return 0.5 * float(np.sum(np.abs(empirical - np.asarray(probabilities))))


# Fokker–Planck, one node

IMPLICIT = 'implicit'
EXPLICIT = 'explicit'
SCHEMES = (IMPLICIT, EXPLICIT)


@dataclass(frozen=True)
class FPGrid:
    n: int = 64
    half_width: Optional[float] = None

    def __post_init__(self):
        if self.n < 4:
            raise ValueError("the grid needs at least 4 cells per side")


@dataclass
class FPReport:
    times: np.ndarray
    D: np.ndarray
    rates: np.ndarray
    mass_drift: float
    dt: float
    half_width: float
    fit_slope: float
    fit_r2: float
    scheme: str

    @property
    def strictly_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.D) <= 1e-12 * max(self.D[0], 1.0)))


def _fp_potential(cost: EnsembleCost, points: np.ndarray, R: float) -> np.ndarray:
    shape = points.shape[:-1]
    values = cost.penalized(points.reshape(-1, 1, 2), R)[0]
    return values.reshape(shape)


def fokker_planck_1node(target: CircleFunction, eps: float, R: float, grid: FPGrid = FPGrid(), T: float = 20.0,
                        dt: float = 0.01, u0: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None,
                        scheme: str = IMPLICIT, measure: DataMeasure = UNIFORM, sign: int = 1) -> FPReport:
    """
    Finite-volume solver for ∂u/∂t = ∇·(ε²∇u·ρ)/ρ, ρ = e^{−Φ_R/ε²}, one node.

    Cells carry mass ρ·h²; the face conductance is ε²·ρ at the face midpoint.
    No-flux boundaries on a square whose half-width makes ρ < 1e-16 on the
    boundary. The discrete operator is self-adjoint in the ρ-weighted inner
    product, so ∑ρu is conserved and D(t) = ∑ρ(u−1)²h² decreases.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")
    if not (0.0 < eps and R > 0.0 and T > 0.0 and dt > 0.0):
        raise ValueError("eps, R, T and dt must be positive")
    cost = EnsembleCost(SignPattern((sign,)), target, measure)
    half_width = grid.half_width
    if half_width is None:
        half_width = 1.05 * np.sqrt(R ** 2 + eps ** 2 * np.log(1.0 / DENSITY_FLOOR) / 4.0)
    n = grid.n

    for _ in range(20):
        h = 2.0 * half_width / n
        centres = -half_width + (np.arange(n) + 0.5) * h
        X, Y = np.meshgrid(centres, centres, indexing='ij')
        potential = _fp_potential(cost, np.stack([X, Y], axis=-1), R)
        log_rho = -potential / eps ** 2
        edge = np.concatenate([log_rho[0], log_rho[-1], log_rho[:, 0], log_rho[:, -1]])
        if grid.half_width is not None or edge.max() < np.log(DENSITY_FLOOR):
            break
        half_width *= 1.1
    mass = np.exp(log_rho).ravel() * h ** 2

    # horizontal faces between (i, j) and (i+1, j); vertical between (i, j) and (i, j+1)
    mid = 0.5 * (centres[:-1] + centres[1:])
    Fx, Fy = np.meshgrid(mid, centres, indexing='ij')
    kappa_x = eps ** 2 * np.exp(-_fp_potential(cost, np.stack([Fx, Fy], axis=-1), R) / eps ** 2)
    Gx, Gy = np.meshgrid(centres, mid, indexing='ij')
    kappa_y = eps ** 2 * np.exp(-_fp_potential(cost, np.stack([Gx, Gy], axis=-1), R) / eps ** 2)

    index = np.arange(n * n).reshape(n, n)
    rows = np.concatenate([index[:-1, :].ravel(), index[:, :-1].ravel()])
    cols = np.concatenate([index[1:, :].ravel(), index[:, 1:].ravel()])
    kappa = np.concatenate([kappa_x.ravel(), kappa_y.ravel()])
    off = sparse.coo_matrix((-kappa, (rows, cols)), shape=(n * n, n * n))
    off = off + off.T
    diagonal = -np.asarray(off.sum(axis=1)).ravel()
    laplacian = (off + sparse.diags(diagonal)).tocsc()

    if u0 is None:
        u = 1.0 + 0.5 * X / half_width
    else:
        u = np.asarray(u0(X, Y), dtype=float)
    u = u.ravel()
    total = mass.sum()
    u = u * total / np.dot(mass, u)

    if scheme == EXPLICIT:
        bound = np.max(2.0 * diagonal / mass)
        if dt > 1.0 / bound:
            logger.warning(f"fokker-planck: explicit dt {dt:.3g} exceeds stability limit, reduced to {1.0 / bound:.3g}")
            dt = 1.0 / bound

        def step(v):
            return v - dt * (laplacian @ v) / mass
    else:
        solver = splu((sparse.diags(mass) + dt * laplacian).tocsc())

        def step(v):
            return solver.solve(mass * v)

    n_steps = int(np.ceil(T / dt - 1e-9))
    times = np.arange(n_steps + 1) * dt
    D = np.empty(n_steps + 1)
    D[0] = np.dot(mass, (u - 1.0) ** 2)
    drift = 0.0
    for k in range(1, n_steps + 1):
        u = step(u)
        D[k] = np.dot(mass, (u - 1.0) ** 2)
        drift = max(drift, abs(np.dot(mass, u) - total) / total)
    check_bound('fokker_planck_mass_drift', drift, MASS_TOL)

    with np.errstate(divide='ignore', invalid='ignore'):
        rates = -np.diff(np.log(D)) / dt
    half = n_steps // 2
    tail = slice(half, n_steps + 1)
    slope, r2 = float('nan'), float('nan')
    if np.all(D[tail] > 0.0) and n_steps - half >= 2:
        fit = linregress(times[tail], np.log(D[tail]))
        slope, r2 = float(fit.slope), float(fit.rvalue ** 2)
    logger.info(f"fokker-planck: {scheme} dt={dt:.3g}, D {D[0]:.3g} -> {D[-1]:.3g}, tail rate {-slope:.4g}")
    return FPReport(times, D, rates, drift, dt, half_width, slope, r2, scheme)


# Poincaré certificate

HIGH_NODE = 'high-node'
GENERIC = 'generic'
UNMET = 'hypotheses unmet'

LINEAR = 'linear'
LOG = 'log'


@dataclass(frozen=True)
class CertificateCheck:
    name: str
    lhs: float
    rhs: float
    scale: str = LINEAR

    @property
    def passed(self) -> bool:
        return bool(self.lhs <= self.rhs)


@dataclass
class PoincareCertificate:
    m: int
    R: float
    eps: float
    regime: str
    log_C_P: Optional[float]
    log_rate: Optional[float]
    checks: List[CertificateCheck]

    @property
    def C_P_bound(self) -> Optional[float]:
        if self.log_C_P is None:
            return None
        return float('inf') if self.log_C_P > LOG_FLOAT_MAX else float(np.exp(self.log_C_P))

    @property
    def rate_bound(self) -> Optional[float]:
        return None if self.log_rate is None else float(np.exp(self.log_rate))

    @property
    def valid(self) -> bool:
        return self.regime != UNMET and all(check.passed for check in self.checks)


def high_node_threshold(R: float, eps: float) -> float:
    return 24.0 * R ** 2 / eps ** 2


def poincare_certificate(m: int, R: float, eps: float) -> PoincareCertificate:
    """
    Evaluate the scalar inequalities behind the Poincaré constant of
    e^{−Φ_R/ε²} on (ℝ²)^m, in log form where the quantities are huge.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if not (0.0 < eps <= 1.0) or R < 10.0:
        logger.info(f"certificate: hypotheses unmet for R={R}, eps={eps}")
        return PoincareCertificate(m, R, eps, UNMET, None, None, [])

    R2, inv_eps2 = R ** 2, 1.0 / eps ** 2
    # on |W| ≤ √2R, using Φ ≤ (|W| + 1)²: 2|F| ≤ (4R² + (s + 1)² − 4s²)₊ with s = |W|
    s = np.append(np.linspace(0.0, np.sqrt(2.0) * R, 4097), 1.0 / 3.0)
    oscillation = float(np.max(np.maximum(4.0 * R2 + (s + 1.0) ** 2 - 4.0 * s ** 2, 0.0)))
    checks = [
        # F vanishes beyond |W|² = 2R² because the penalty dominates (|W|+1)² there
        CertificateCheck('penalty_dominates_at_sqrt2R', (np.sqrt(2.0) * R + 1.0) ** 2, 4.0 * (2.0 * R2 - R2)),
        CertificateCheck('perturbation_oscillation', oscillation, 4.0 * R2 + 2.0),
    ]
    log_C_LS = np.log(eps ** 2 / 8.0)
    beta = 0.25
    log_ball = m * np.log(np.pi) - gammaln(m + 1) + 2 * m * np.log(np.sqrt(2.0) * R)
    log_ball_stirling = -0.5 * np.log(TWO_PI * m) + m * np.log(TWO_PI * np.e * R2 / m)
    checks.append(CertificateCheck('ball_volume_stirling', log_ball, log_ball_stirling, LOG))

    if m >= high_node_threshold(R, eps):
        regime = HIGH_NODE
        log_base = np.log(8.0 * np.e * R2 * inv_eps2 / m)
        log_tail = -0.5 * np.log(TWO_PI * m) + m * log_base
        checks.append(CertificateCheck('perturbation_tail', log_tail, np.log(0.1), LOG))
        factor = np.exp(1.0 / 11.0) * np.e / 3.0
        checks.append(CertificateCheck('high_node_factor', factor, 1.0))
        log_geometric = np.log(0.01) + m * np.log(factor)
        log_chain = 1.25 * inv_eps2 + 2.0 * R2 * inv_eps2 + log_tail
        checks.append(CertificateCheck('perturbation_geometric', log_chain, log_geometric, LOG))
        checks.append(CertificateCheck('perturbation_chain', log_geometric, np.log(0.125), LOG))
        checks.append(CertificateCheck('perturbation_sqrt_margin', 1.0 - 0.125, np.sqrt(1.0 - 0.1)))
        C_P = 64.0 * np.exp(log_C_LS) * (1.0 + beta) * (1.0 - beta / 2.0) / beta ** 2 * inv_eps2
        checks.append(CertificateCheck('C_P_formula', C_P, 140.0 * (1.0 + 1e-12)))
        log_C_P = float(np.log(140.0))
        log_rate = float(np.log(1.0 / 70.0))
    else:
        regime = GENERIC
        log_C_P = float(np.log(1.0 / 8.0) + (4.0 * R2 + 2.0) * inv_eps2)
        log_bounded = float(log_C_LS + (4.0 * R2 + 2.0) * inv_eps2)
        checks.append(CertificateCheck('bounded_perturbation', log_bounded, log_C_P, LOG))
        log_rate = float(np.log(16.0) - (4.0 * R2 + 2.0) * inv_eps2)

    relation = abs(log_rate - (np.log(2.0) - log_C_P))
    checks.append(CertificateCheck('rate_equals_2_over_C_P', relation, 1e-12, LOG))
    certificate = PoincareCertificate(m, R, eps, regime, log_C_P, log_rate, checks)
    logger.info(f"certificate m={m} R={R} eps={eps}: {regime}, log C_P={log_C_P:.6g}, valid={certificate.valid}")
    return certificate
