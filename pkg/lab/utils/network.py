"""
Shallow ReLU networks on the circle and the closure elements they converge to.

f_W(x) = (1/√m) Σ a_i σ(w_i·x); a closure element replaces alternating node
pairs by indicator-times-linear terms I{ŵ·x ≥ 0}(v·x).
"""
import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .circle_geometry import PiecewiseTrig, half_circle_start, inner_product, norm

logger = logging.getLogger(__name__)

UNIT_TOL = 1e-9


@dataclass(frozen=True)
class SignPattern:
    signs: Tuple[int, ...]

    def __post_init__(self):
        signs = tuple(int(a) for a in self.signs)
        if not signs:
            raise ValueError("a sign pattern needs at least one node")
        if any(a not in (-1, 1) for a in signs):
            raise ValueError(f"signs must be ±1, got {signs}")
        object.__setattr__(self, 'signs', signs)

    @classmethod
    def alternating(cls, m: int) -> 'SignPattern':
        return cls(tuple(1 if i % 2 == 0 else -1 for i in range(m)))

    @classmethod
    def all_positive(cls, m: int) -> 'SignPattern':
        return cls((1,) * m)

    @classmethod
    def parse(cls, text: str) -> 'SignPattern':
        """'+,-,+' or '1 -1 1' or 'alt:8' / 'pos:4'."""
        text = text.strip()
        if text.startswith('alt:'):
            return cls.alternating(int(text[4:]))
        if text.startswith('pos:'):
            return cls.all_positive(int(text[4:]))
        tokens = text.replace(',', ' ').split()
        return cls(tuple(1 if token in ('+', '+1', '1') else -1 if token in ('-', '-1') else int(token)
                         for token in tokens))

    @property
    def m(self) -> int:
        return len(self.signs)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.signs, dtype=float)

    @property
    def plus_nodes(self) -> List[int]:
        return [i for i, a in enumerate(self.signs) if a == 1]

    @property
    def minus_nodes(self) -> List[int]:
        return [i for i, a in enumerate(self.signs) if a == -1]

    @property
    def m_under(self) -> int:
        return min(len(self.plus_nodes), len(self.minus_nodes))

    @property
    def c_m(self) -> float:
        """C(m) = √(m/m̲), infinite when one sign is missing."""
        if self.m_under == 0:
            return float('inf')
        return float(np.sqrt(self.m / self.m_under))

    def __str__(self):
        return ','.join('+' if a == 1 else '-' for a in self.signs)


@dataclass(frozen=True)
class Reordering:
    permutation: Tuple[int, ...]
    m_under: int
    c_m: float
    flipped: bool


def reorder_alternating(signs: SignPattern) -> Reordering:
    """
    Permutation putting the first 2m̲ signs in +,−,+,− order and the rest +.

    When minus signs outnumber plus signs the whole pattern is flipped first
    (f_{W,−a} = −f_{W,a}); the flip is reported.
    """
    flipped = len(signs.minus_nodes) > len(signs.plus_nodes)
    plus, minus = signs.plus_nodes, signs.minus_nodes
    if flipped:
        plus, minus = minus, plus
        logger.info(f"sign pattern {signs} flipped before reordering")
    pairs = min(len(plus), len(minus))
    permutation = []
    for i in range(pairs):
        permutation.extend([plus[i], minus[i]])
    permutation.extend(plus[pairs:])
    return Reordering(tuple(permutation), signs.m_under, signs.c_m, flipped)


@dataclass(frozen=True, eq=False)
class ReluNetwork:
    __array_ufunc__ = None

    signs: SignPattern
    weights: np.ndarray

    def __post_init__(self):
        weights = np.array(self.weights, dtype=float).reshape(-1, 2)
        if weights.shape[0] != self.signs.m:
            raise ValueError(f"{self.signs.m} signs but {weights.shape[0]} weight vectors")
        weights.flags.writeable = False
        object.__setattr__(self, 'weights', weights)

    @classmethod
    def zeros(cls, signs: SignPattern) -> 'ReluNetwork':
        return cls(signs, np.zeros((signs.m, 2)))

    @property
    def m(self) -> int:
        return self.signs.m

    @property
    def weight_norm(self) -> float:
        return float(np.sqrt(np.sum(self.weights ** 2)))

    def with_weights(self, weights) -> 'ReluNetwork':
        return ReluNetwork(self.signs, weights)

    def evaluate(self, theta):
        theta = np.asarray(theta, dtype=float)
        points = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        activations = np.maximum(points @ self.weights.T, 0.0)
        return activations @ self.signs.array / np.sqrt(self.m)

    def __mul__(self, scale):
        if not np.isscalar(scale):
            return NotImplemented
        return self.with_weights(float(scale) * self.weights)

    __rmul__ = __mul__

    def __repr__(self):
        return f"ReluNetwork(m={self.m}, |W|={self.weight_norm:.6g})"


@dataclass(frozen=True)
class JTerm:
    direction: Tuple[float, float]
    v: Tuple[float, float]

    def __post_init__(self):
        direction = tuple(float(x) for x in self.direction)
        length = float(np.hypot(*direction))
        if length == 0.0:
            raise ValueError("indicator direction must be nonzero")
        if abs(length - 1.0) > UNIT_TOL:
            raise ValueError(f"indicator direction must be a unit vector, got length {length}")
        object.__setattr__(self, 'direction', direction)
        object.__setattr__(self, 'v', tuple(float(x) for x in self.v))


@dataclass(frozen=True)
class KTerm:
    sign: int
    w: Tuple[float, float]

    def __post_init__(self):
        if int(self.sign) not in (-1, 1):
            raise ValueError("K term sign must be ±1")
        object.__setattr__(self, 'sign', int(self.sign))
        object.__setattr__(self, 'w', tuple(float(x) for x in self.w))


@dataclass(frozen=True, eq=False)
class ClosureElement:
    """
    g(x) = (1/√m)[Σ_J I{ŵ_i·x ≥ 0}(v_i·x) + Σ_K a_i σ(w_i·x)].

    Each J term consumes one + node and one − node; K terms consume a node of
    their own sign.
    """
    signs: SignPattern
    j_terms: Tuple[JTerm, ...] = ()
    k_terms: Tuple[KTerm, ...] = ()

    def __post_init__(self):
        j_terms = tuple(self.j_terms)
        k_terms = tuple(self.k_terms)
        object.__setattr__(self, 'j_terms', j_terms)
        object.__setattr__(self, 'k_terms', k_terms)
        if len(j_terms) > self.signs.m_under:
            raise ValueError(f"{len(j_terms)} indicator terms need {len(j_terms)} alternating pairs, "
                             f"signs provide {self.signs.m_under}")
        phases = [np.arctan2(t.direction[1], t.direction[0]) for t in j_terms]
        for i in range(len(phases)):
            for k in range(i):
                gap = abs(np.angle(np.exp(1j * (phases[i] - phases[k]))))
                if gap <= 1e-12:
                    raise ValueError("indicator directions must be pairwise distinct")
        spare_plus = len(self.signs.plus_nodes) - len(j_terms)
        spare_minus = len(self.signs.minus_nodes) - len(j_terms)
        if sum(t.sign == 1 for t in k_terms) > spare_plus or sum(t.sign == -1 for t in k_terms) > spare_minus:
            raise ValueError(f"K terms need more nodes than the signs {self.signs} leave free")

    @property
    def m(self) -> int:
        return self.signs.m

    @property
    def directions(self) -> np.ndarray:
        return np.array([t.direction for t in self.j_terms], dtype=float).reshape(-1, 2)

    @property
    def slopes(self) -> np.ndarray:
        return np.array([t.v for t in self.j_terms], dtype=float).reshape(-1, 2)

    def evaluate(self, theta):
        theta = np.asarray(theta, dtype=float)
        points = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        total = np.zeros(theta.shape)
        for term in self.j_terms:
            total = total + np.where(points @ np.array(term.direction) >= 0.0, points @ np.array(term.v), 0.0)
        for term in self.k_terms:
            total = total + term.sign * np.maximum(points @ np.array(term.w), 0.0)
        return total / np.sqrt(self.m)

    def __repr__(self):
        return f"ClosureElement(m={self.m}, J={len(self.j_terms)}, K={len(self.k_terms)})"


def to_piecewise(obj) -> PiecewiseTrig:
    """Exact PiecewiseTrig form of a ReluNetwork or ClosureElement."""
    scale = 1.0 / np.sqrt(obj.m)
    rows = []
    if isinstance(obj, ReluNetwork):
        for a, w in zip(obj.signs.signs, obj.weights):
            if w[0] == 0.0 and w[1] == 0.0:
                continue
            rows.append((half_circle_start(w), np.pi, 0.0, a * scale * w[0], a * scale * w[1]))
    elif isinstance(obj, ClosureElement):
        for term in obj.j_terms:
            rows.append((half_circle_start(term.direction), np.pi, 0.0, scale * term.v[0], scale * term.v[1]))
        for term in obj.k_terms:
            if term.w[0] == 0.0 and term.w[1] == 0.0:
                continue
            rows.append((half_circle_start(term.w), np.pi, 0.0,
                         term.sign * scale * term.w[0], term.sign * scale * term.w[1]))
    else:
        raise TypeError(f"cannot convert {type(obj).__name__} to PiecewiseTrig")
    return PiecewiseTrig.from_terms(rows)


def closure_linear_part(elem: ClosureElement) -> np.ndarray:
    """b with g^a(x) = b·x: (1/√m)(½Σ_J v_i + ½Σ_K a_i w_i)."""
    total = 0.5 * elem.slopes.sum(axis=0)
    for term in elem.k_terms:
        total = total + 0.5 * term.sign * np.array(term.w)
    return total / np.sqrt(elem.m)


def split_slope(elem: ClosureElement) -> Tuple[np.ndarray, np.ndarray]:
    """v_i = α_i ŵ_i + u_i with u_i ⊥ ŵ_i; returns (α, u)."""
    directions, slopes = elem.directions, elem.slopes
    alpha = np.sum(directions * slopes, axis=1)
    return alpha, slopes - alpha[:, None] * directions


def realization_bound(elem: ClosureElement, h: float) -> float:
    """(2/√m) Σ_J |u_i|^{3/2} √h."""
    _, u = split_slope(elem)
    return float(2.0 / np.sqrt(elem.m) * np.sum(np.linalg.norm(u, axis=1) ** 1.5) * np.sqrt(h))


def realize_closure(elem: ClosureElement, h: float) -> ReluNetwork:
    """
    Finite network approximating a closure element at scale h.

    Each J term takes a + node with weight ŵ_i/h + u_i and a − node with
    weight (1/h − α_i)ŵ_i; K terms are copied onto free nodes of their sign
    and every remaining node gets weight zero.

    :param elem: closure element to realize
    :param h: positive scale, with h·α_i < 1 for every J term
    :return: network whose L² distance to elem is at most realization_bound
    """
    if not h > 0.0:
        raise ValueError(f"realization scale must be positive, got {h}")
    if len(elem.j_terms) > elem.signs.m_under:
        raise ValueError(f"needs {len(elem.j_terms)} alternating pairs, signs provide {elem.signs.m_under}")
    alpha, u = split_slope(elem)
    if np.any(h * alpha >= 1.0):
        worst = float(np.max(alpha))
        raise ValueError(f"scale h={h} too coarse for slope component α={worst}; need h·α < 1")
    plus, minus = list(elem.signs.plus_nodes), list(elem.signs.minus_nodes)
    weights = np.zeros((elem.m, 2))
    for i, term in enumerate(elem.j_terms):
        direction = np.array(term.direction)
        weights[plus.pop(0)] = direction / h + u[i]
        weights[minus.pop(0)] = (1.0 / h - alpha[i]) * direction
    for term in elem.k_terms:
        free = plus if term.sign == 1 else minus
        weights[free.pop(0)] = term.w
    return ReluNetwork(elem.signs, weights)


def replicate(net_prime: ReluNetwork, m: int, signs: SignPattern) -> ReluNetwork:
    """
    Copy a balanced m′-node network k = ⌊2m̲/m′⌋ times into m nodes.

    Copies are scaled by λ = k⁻¹√(m/m′) so that f_{W_λ} = f_{W′}; unused
    nodes get weight zero.
    """
    m_prime = net_prime.m
    if signs.m != m:
        raise ValueError(f"sign pattern has {signs.m} entries, expected {m}")
    if m_prime % 2:
        raise ValueError(f"source network must have an even node count, got {m_prime}")
    if len(net_prime.signs.plus_nodes) != m_prime // 2:
        raise ValueError("source network must have as many + nodes as − nodes")
    if m_prime // 2 > signs.m_under:
        raise ValueError(f"m′/2 = {m_prime // 2} exceeds m̲ = {signs.m_under}")
    k = (2 * signs.m_under) // m_prime
    lam = np.sqrt(m / m_prime) / k
    plus, minus = list(signs.plus_nodes), list(signs.minus_nodes)
    weights = np.zeros((m, 2))
    for _ in range(k):
        for a, w in zip(net_prime.signs.signs, net_prime.weights):
            weights[(plus if a == 1 else minus).pop(0)] = lam * w
    return ReluNetwork(signs, weights)


def replication_factors(m_prime: int, m: int, m_under: int) -> Tuple[int, float]:
    k = (2 * m_under) // m_prime
    return k, float(np.sqrt(m / m_prime) / k)


def all_positive_lower_bound(net: ReluNetwork) -> Tuple[float, float]:
    """(‖f_W‖², |W|²/(4m)); the first dominates when every sign is +."""
    f = to_piecewise(net)
    return inner_product(f, f), net.weight_norm ** 2 / (4.0 * net.m)


def l2_distance(lhs, rhs) -> float:
    return norm(to_piecewise(lhs) - to_piecewise(rhs))


def dumps_network(net: ReluNetwork) -> str:
    lines = [str(net.m)]
    for a, (wx, wy) in zip(net.signs.signs, net.weights):
        lines.append(f"{a:d} {wx:.17g} {wy:.17g}")
    return '\n'.join(lines) + '\n'


def loads_network(text: str) -> ReluNetwork:
    rows = [line.split() for line in text.splitlines() if line.strip()]
    m = int(rows[0][0])
    if len(rows) != m + 1:
        raise ValueError(f"network header announces {m} nodes, found {len(rows) - 1}")
    signs = SignPattern(tuple(int(row[0]) for row in rows[1:]))
    return ReluNetwork(signs, [[float(row[1]), float(row[2])] for row in rows[1:]])


def dumps_closure(elem: ClosureElement) -> str:
    lines = [f"{len(elem.j_terms)} {len(elem.k_terms)}", ' '.join(str(a) for a in elem.signs.signs)]
    for term in elem.j_terms:
        lines.append(' '.join(f"{x:.17g}" for x in (*term.direction, *term.v)))
    for term in elem.k_terms:
        lines.append(f"{term.sign:d} {term.w[0]:.17g} {term.w[1]:.17g}")
    return '\n'.join(lines) + '\n'


def loads_closure(text: str) -> ClosureElement:
    rows = [line.split() for line in text.splitlines() if line.strip()]
    n_j, n_k = int(rows[0][0]), int(rows[0][1])
    if len(rows) != 2 + n_j + n_k:
        raise ValueError(f"closure header announces {n_j}+{n_k} terms, found {len(rows) - 2}")
    signs = SignPattern(tuple(int(a) for a in rows[1]))
    j_terms = tuple(JTerm((float(r[0]), float(r[1])), (float(r[2]), float(r[3]))) for r in rows[2:2 + n_j])
    k_terms = tuple(KTerm(int(r[0]), (float(r[1]), float(r[2]))) for r in rows[2 + n_j:])
    return ClosureElement(signs, j_terms, k_terms)


def unit(angle: float) -> Tuple[float, float]:
    return float(np.cos(angle)), float(np.sin(angle))


def closure_from_arrays(signs: SignPattern, directions: Sequence, slopes: Sequence,
                        k_terms: Sequence[KTerm] = ()) -> ClosureElement:
    j_terms = tuple(JTerm(tuple(d), tuple(v)) for d, v in zip(directions, slopes))
    return ClosureElement(signs, j_terms, tuple(k_terms))
