"""Adaptation of the scalar regression coefficient alpha."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .estimators import GradEstimate
from .optim import AdamState, adam_step


@dataclass(frozen=True)
class AlphaState:
    alpha: float = 0.0
    adam: AdamState = field(default_factory=AdamState)

    @property
    def step(self) -> int:
        return self.adam.t


def alpha_grad(estimate: GradEstimate, alpha: float) -> float:
    """``d/d alpha ||u + alpha v||^2``, summed over every leading axis."""
    v = estimate.v
    return float(2.0 * np.sum(v * (estimate.u + alpha * v)))


def best_alpha(estimate: GradEstimate) -> float:
    """Minimizer of ``||u + alpha v||^2`` for a single estimate (0 when ``v`` vanishes)."""
    vv = float(np.sum(estimate.v * estimate.v))
    if vv == 0.0:
        return 0.0
    return -float(np.sum(estimate.u * estimate.v)) / vv


def adapt(state: AlphaState, grad: float, lr: float) -> AlphaState:
    """One Adam descent step on alpha."""
    if lr <= 0:
        raise ValueError("alpha learning rate must be positive")
    (alpha,), adam = adam_step([np.array(state.alpha)], [np.array(grad)], state.adam, lr)
    return AlphaState(float(alpha), adam)


def optimal_alpha_k2(g_samples, h_samples, weights=None) -> float:
    """``E[g^T h] / E[h^T h]`` for the K=2 form ``(g - alpha h) / 2``.

    ``weights`` are optional probabilities (exhaustive enumeration); without
    them the plain sample mean is used. Returns 0 when ``h`` is degenerate.
    """
    g = np.asarray(g_samples, dtype=np.float64)
    h = np.asarray(h_samples, dtype=np.float64)
    if g.shape != h.shape:
        raise ValueError("g and h samples must have matching shapes")
    w = np.full(g.shape[0], 1.0 / g.shape[0]) if weights is None else np.asarray(weights, dtype=np.float64)
    hh = float(np.sum(w * np.sum(h * h, axis=-1)))
    if hh == 0.0:
        return 0.0
    return float(np.sum(w * np.sum(g * h, axis=-1))) / hh


def k2_regression_pair(estimate: GradEstimate) -> tuple[np.ndarray, np.ndarray]:
    """Map a K=2 ``(u, v)`` estimate to ``(g, h)`` with ``u + alpha v == (g - alpha h) / 2``."""
    return 2.0 * estimate.u, -2.0 * estimate.v
