"""Functional Adam and SGD updates over lists of numpy arrays."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

BETA1 = 0.9
BETA2 = 0.999
EPS = 1e-8


@dataclass
class AdamState:
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)
    t: int = 0

    @classmethod
    def zeros_like(cls, params) -> "AdamState":
        return cls([np.zeros_like(p, dtype=np.float64) for p in params],
                   [np.zeros_like(p, dtype=np.float64) for p in params], 0)


def adam_step(params, grads, state: AdamState, lr: float, maximize: bool = False):
    """One Adam step; returns ``(new_params, new_state)`` and leaves inputs untouched.

    ``maximize=True`` ascends along ``grads``.
    """
    if len(params) != len(grads):
        raise ValueError("params and grads must have the same length")
    if not state.m:
        state = AdamState.zeros_like(params)
    t = state.t + 1
    bc1 = 1.0 - BETA1 ** t
    bc2 = 1.0 - BETA2 ** t
    sign = 1.0 if maximize else -1.0
    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        p = np.asarray(p, dtype=np.float64)
        g = np.asarray(g, dtype=np.float64)
        if p.shape != g.shape:
            raise ValueError(f"shape mismatch: param {p.shape} vs grad {g.shape}")
        m = BETA1 * m + (1.0 - BETA1) * g
        v = BETA2 * v + (1.0 - BETA2) * (g * g)
        step = lr * (m / bc1) / (np.sqrt(v / bc2) + EPS)
        new_params.append(p + sign * step)
        new_m.append(m)
        new_v.append(v)
    return new_params, AdamState(new_m, new_v, t)


def sgd_step(params, grads, lr: float, maximize: bool = False):
    sign = 1.0 if maximize else -1.0
    return [np.asarray(p, dtype=np.float64) + sign * lr * np.asarray(g) for p, g in zip(params, grads)]
