"""
The training cost Φ(W) = ‖f_W − y‖²_{L²(μ)}, its penalization
Φ_R(W) = max{Φ(W), 4(|W|² − R²)} and their gradients.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .circle_geometry import (
    TWO_PI, UNIFORM, CircleFunction, DataMeasure, PiecewiseTrig,
    _raw_moments, inner_product, wrap_angle,
)
from .network import ReluNetwork, SignPattern, to_piecewise

logger = logging.getLogger(__name__)

COST = 'cost'
PENALTY = 'penalty'


@dataclass(frozen=True, eq=False)
class CostReport:
    phi: float
    grad: np.ndarray
    phi_R: float
    grad_R: np.ndarray
    active_branch: str


def _active_arcs(weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Start and width of {w·x ≥ 0}; a zero weight is active everywhere."""
    phases = np.arctan2(weights[..., 1], weights[..., 0])
    zero = (weights[..., 0] == 0.0) & (weights[..., 1] == 0.0)
    starts = np.where(zero, 0.0, wrap_angle(phases - 0.5 * np.pi))
    widths = np.where(zero, TWO_PI, np.pi)
    return starts, widths


def phi(net: ReluNetwork, target: CircleFunction, measure: DataMeasure = UNIFORM) -> float:
    """Φ(W), exact under the uniform measure."""
    f = to_piecewise(net)
    if not measure.is_uniform:
        residual = f.evaluate(measure.angles) - target.evaluate(measure.angles)
        return float(np.sum(measure.weights * residual ** 2))
    if isinstance(target, PiecewiseTrig):
        residual = f - target
        return max(inner_product(residual, residual), 0.0)
    value = inner_product(f, f) - 2.0 * inner_product(f, target) + inner_product(target, target)
    return max(value, 0.0)


def grad_phi(net: ReluNetwork, target: CircleFunction, measure: DataMeasure = UNIFORM) -> np.ndarray:
    """
    ∂_{w_i}Φ = (2a_i/√m)·E_μ[I{w_i·x ≥ 0}(f_W − y)(x)·x], with σ′(0) = 1.

    Under the uniform measure the expectation is an exact arc integral of the
    residual over the half-circle of node i.
    """
    scale = 2.0 * net.signs.array / np.sqrt(net.m)
    if not measure.is_uniform:
        points = measure.points
        residual = net.evaluate(measure.angles) - target.evaluate(measure.angles)
        active = (points @ net.weights.T >= 0.0).astype(float)
        moments = (active * (measure.weights * residual)[:, None]).T @ points
        return scale[:, None] * moments
    starts, widths = _active_arcs(net.weights)
    f = to_piecewise(net)
    if isinstance(target, PiecewiseTrig):
        moments = (f - target).arc_integrals(starts, widths)[:, 1:]
    else:
        moments = f.arc_integrals(starts, widths)[:, 1:] - target.arc_integrals(starts, widths)[:, 1:]
    return scale[:, None] * moments


def penalty(weights: np.ndarray, R: float) -> np.ndarray:
    """4(|W|² − R²) per network; weights of shape (..., m, 2)."""
    return 4.0 * (np.sum(weights ** 2, axis=(-2, -1)) - R ** 2)


def phi_R_and_grad(net: ReluNetwork, target: CircleFunction, measure: DataMeasure, R: float) -> CostReport:
    """Exact Φ_R and its gradient; at Φ = 4(|W|² − R²) the penalty gradient 8W is used."""
    if not R > 0.0:
        raise ValueError(f"penalization radius must be positive, got {R}")
    value = phi(net, target, measure)
    grad = grad_phi(net, target, measure)
    barrier = float(penalty(net.weights, R))
    if value > barrier:
        return CostReport(value, grad, value, grad, COST)
    return CostReport(value, grad, barrier, 8.0 * np.array(net.weights), PENALTY)


def growth_checks(net: ReluNetwork, report: CostReport) -> Dict[str, Tuple[float, float]]:
    """
    The three growth and coercivity inequalities as (lhs, rhs) with lhs ≤ rhs
    expected whenever ‖y‖_{L²(μ)} ≤ 1.
    """
    w_norm = net.weight_norm
    grad_sq = float(np.sum(report.grad ** 2))
    return {
        'phi_growth': (report.phi, (w_norm + 1.0) ** 2),
        'grad_bound': (grad_sq, 4.0 * report.phi),
        'coercivity': (report.phi - 1.0, float(np.sum(report.grad * net.weights))),
    }


class EnsembleCost:
    """
    Exact Φ, Φ_R and gradients for a batch of networks sharing signs and target.

    Weights come as an array of shape (n, m, 2). Under the uniform measure the
    cross terms E[σ(w_i·x)σ(w_j·x)] are second moments over the overlap of
    the two active half-circles, and the target enters only through its arc
    integrals over each active half-circle.
    """

    def __init__(self, signs: SignPattern, target: CircleFunction, measure: DataMeasure = UNIFORM):
        self.signs = signs
        self.target = target
        self.measure = measure
        self.a = signs.array
        self.root_m = np.sqrt(signs.m)
        if measure.is_uniform:
            self.target_norm_sq = inner_product(target, target)
        else:
            self.points = measure.points
            self.target_values = target.evaluate(measure.angles)

    def value_and_grad(self, weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        weights = np.asarray(weights, dtype=float)
        if weights.ndim == 2:
            value, grad = self.value_and_grad(weights[None])
            return value[0], grad[0]
        if self.measure.is_uniform:
            return self._uniform(weights)
        return self._discrete(weights)

    def value(self, weights: np.ndarray) -> np.ndarray:
        return self.value_and_grad(weights)[0]

    def penalized(self, weights: np.ndarray, R: float):
        """(Φ_R, ∇Φ_R, Φ, penalty-branch mask) for a batch."""
        weights = np.asarray(weights, dtype=float)
        value, grad = self.value_and_grad(weights)
        barrier = penalty(weights, R)
        on_penalty = value <= barrier
        mask = on_penalty[..., None, None] if weights.ndim == 3 else on_penalty
        grad_R = np.where(mask, 8.0 * weights, grad)
        return np.maximum(value, barrier), grad_R, value, on_penalty

    def _uniform(self, weights):
        n, m, _ = weights.shape
        starts, widths = _active_arcs(weights)
        target_moments = self.target.arc_integrals(starts.ravel(), widths.ravel())[:, 1:].reshape(n, m, 2)

        zero = widths > np.pi
        phases = starts + 0.5 * np.pi
        gap = np.angle(np.exp(1j * (phases[:, None, :] - phases[:, :, None])))
        overlap_start = phases[:, :, None] + np.maximum(gap, 0.0) - 0.5 * np.pi
        overlap_width = np.pi - np.abs(gap)
        zi, zj = zero[:, :, None], zero[:, None, :]
        overlap_start = np.where(zi & ~zj, starts[:, None, :], overlap_start)
        overlap_start = np.where(zj & ~zi, starts[:, :, None], overlap_start)
        overlap_width = np.where(zi ^ zj, np.pi, overlap_width)
        overlap_start = np.where(zi & zj, 0.0, overlap_start)
        overlap_width = np.where(zi & zj, TWO_PI, overlap_width)
        moments = _raw_moments(overlap_start, overlap_width) / TWO_PI
        mcc, mcs, mss = moments[..., 3], moments[..., 4], moments[..., 5]

        signed = self.a[None, :, None] * weights
        wx, wy = signed[..., 0][:, None, :], signed[..., 1][:, None, :]
        network_moments = np.stack([
            np.sum(mcc * wx + mcs * wy, axis=2),
            np.sum(mcs * wx + mss * wy, axis=2),
        ], axis=-1) / self.root_m

        norm_sq = np.sum(signed * network_moments, axis=(1, 2)) / self.root_m
        cross = np.sum(signed * target_moments, axis=(1, 2)) / self.root_m
        value = np.maximum(norm_sq - 2.0 * cross + self.target_norm_sq, 0.0)
        grad = 2.0 * self.a[None, :, None] / self.root_m * (network_moments - target_moments)
        return value, grad

    def _discrete(self, weights):
        pre = np.einsum('nmd,kd->nmk', weights, self.points)
        outputs = np.einsum('m,nmk->nk', self.a, np.maximum(pre, 0.0)) / self.root_m
        residual = outputs - self.target_values[None, :]
        value = residual ** 2 @ self.measure.weights
        weighted = (pre >= 0.0) * (self.measure.weights * residual)[:, None, :]
        grad = 2.0 * self.a[None, :, None] / self.root_m * np.einsum('nmk,kd->nmd', weighted, self.points)
        return value, grad
