"""Score-function gradient estimators for factorized Bernoulli latents.

All estimators consume a precomputed :class:`SampleBatch` and never call the
objective. They return a :class:`GradEstimate` ``(u, v)`` so that the gradient
at regression coefficient ``alpha`` is ``u + alpha * v``.

Arrays carry arbitrary leading axes: ``xs`` has shape ``(..., K, D)``, and
results have shape ``(..., D)``. The oracle relies on this to evaluate every
enumerated sample tuple in one call.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import bernoulli
from .objectives import Objective, ObjectiveEval


@dataclass
class SampleBatch:
    xs: np.ndarray  # (..., K, D)
    fvals: np.ndarray  # (..., K)
    input_grads: np.ndarray  # (..., K, D)
    scores: np.ndarray  # (..., K, D)
    mu: np.ndarray  # (..., D)
    covdiag: np.ndarray  # (..., D)

    def __post_init__(self):
        k, d = self.xs.shape[-2:]
        if self.fvals.shape[-1] != k or self.input_grads.shape[-2:] != (k, d) or self.scores.shape[-2:] != (k, d):
            raise ValueError("inconsistent K or D across batch fields")
        if self.mu.shape[-1] != d or self.covdiag.shape[-1] != d:
            raise ValueError("mu/covdiag must have length D")

    @property
    def k(self) -> int:
        return self.xs.shape[-2]

    def centered(self) -> np.ndarray:
        return self.xs - self.mu[..., None, :]


def make_batch(eta, xs, objective: Objective) -> SampleBatch:
    """Evaluate ``objective`` once per sample and assemble the batch."""
    eta = bernoulli.as_logits(eta)
    xs = np.asarray(xs, dtype=np.float64)
    ev = objective.evaluate(xs)
    mu, covdiag = bernoulli.mean_and_covdiag(eta)
    return SampleBatch(xs, ev.value, ev.input_grad, xs - mu[..., None, :], mu, covdiag)


@dataclass
class GradEstimate:
    u: np.ndarray
    v: np.ndarray

    def at(self, alpha) -> np.ndarray:
        # alpha is a scalar or carries the leading axes of u
        return self.u + np.asarray(alpha, dtype=np.float64)[..., None] * self.v


def _require_k(batch: SampleBatch, k_min: int = 2):
    if batch.k < k_min:
        raise ValueError(f"estimator needs K >= {k_min}, got K={batch.k}")


def _weighted_scores(weights, scores) -> np.ndarray:
    return np.sum(weights[..., None] * scores, axis=-2)


def _rloo_form(vals, scores) -> np.ndarray:
    # (1/K) sum_k (val_k - mean_{j != k} val_j) s_k in covariance form
    k = vals.shape[-1]
    centered = vals - vals.mean(axis=-1, keepdims=True)
    return _weighted_scores(centered, scores) / (k - 1)


def reinforce(batch: SampleBatch, baseline: float = 0.0) -> GradEstimate:
    u = _weighted_scores(batch.fvals - baseline, batch.scores) / batch.k
    return GradEstimate(u, np.zeros_like(u))


def rloo(batch: SampleBatch) -> GradEstimate:
    _require_k(batch)
    u = _rloo_form(batch.fvals, batch.scores)
    return GradEstimate(u, np.zeros_like(u))


def r_star(batch: SampleBatch, exact_mean) -> GradEstimate:
    """REINFORCE with the exact mean ``E_q f`` as baseline."""
    exact_mean = np.asarray(exact_mean, dtype=np.float64)
    return reinforce(batch, exact_mean[..., None] if exact_mean.ndim else float(exact_mean))


def _mean_field_cv(batch: SampleBatch, grad_mu) -> np.ndarray:
    return np.sum(grad_mu[..., None, :] * batch.centered(), axis=-1)


def double_cv_meanfield(batch: SampleBatch, f_mu: ObjectiveEval) -> GradEstimate:
    """RLOO on ``f + alpha * grad f(mu)^T (x - mu)`` with its analytic correction."""
    _require_k(batch)
    grad_mu = np.asarray(f_mu.input_grad, dtype=np.float64)
    cv = _mean_field_cv(batch, grad_mu)
    v = _rloo_form(cv, batch.scores) - batch.covdiag * grad_mu
    return GradEstimate(rloo(batch).u, v)


def loo_gradient_cv(batch: SampleBatch) -> np.ndarray:
    """``b_k = (mean_{j != k} grad f(x_j))^T (x_k - mu)``, shape ``(..., K)``."""
    k = batch.k
    loo_grads = (batch.input_grads.sum(axis=-2, keepdims=True) - batch.input_grads) / (k - 1)
    return np.sum(loo_grads * batch.centered(), axis=-1)


def _loo_correction(batch: SampleBatch) -> np.ndarray:
    return batch.covdiag * batch.input_grads.mean(axis=-2)


def double_cv_loo(batch: SampleBatch) -> GradEstimate:
    """Double control variate built from leave-one-out input gradients.

    Needs no gradient evaluations beyond the ones at the K samples.
    """
    _require_k(batch)
    cv = loo_gradient_cv(batch)
    v = _rloo_form(cv, batch.scores) - _loo_correction(batch)
    return GradEstimate(rloo(batch).u, v)


def half_cv(batch: SampleBatch, mode: str) -> GradEstimate:
    """Keep only one half of the double control variate.

    ``bxk_only`` pairs ``alpha * b_k`` with ``f(x_k)`` and needs the correction;
    ``bxj_only`` adds ``alpha * b_j`` to the leave-one-out average only.
    """
    _require_k(batch)
    k = batch.k
    cv = loo_gradient_cv(batch)
    if mode == "bxk_only":
        v = _weighted_scores(cv, batch.scores) / k - _loo_correction(batch)
    elif mode == "bxj_only":
        loo_cv = (cv.sum(axis=-1, keepdims=True) - cv) / (k - 1)
        v = -_weighted_scores(loo_cv, batch.scores) / k
    else:
        raise ValueError(f"unknown half estimator mode {mode!r}")
    return GradEstimate(rloo(batch).u, v)


def muprop(batch: SampleBatch, f_mu: ObjectiveEval) -> GradEstimate:
    """First-order Taylor baseline ``f(mu) + grad f(mu)^T (x - mu)`` with analytic correction."""
    grad_mu = np.asarray(f_mu.input_grad, dtype=np.float64)
    baseline = np.asarray(f_mu.value, dtype=np.float64)[..., None] + _mean_field_cv(batch, grad_mu)
    u = _weighted_scores(batch.fvals - baseline, batch.scores) / batch.k + batch.covdiag * grad_mu
    return GradEstimate(u, np.zeros_like(u))


def disarm_k2(f_pair, x, x_tilde, eta) -> GradEstimate:
    """DisARM for one antithetic pair ``(x, x_tilde)``."""
    f_pair = np.asarray(f_pair, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    x_tilde = np.asarray(x_tilde, dtype=np.float64)
    sig_abs = bernoulli.sigmoid(np.abs(bernoulli.as_logits(eta)))
    return _disarm(f_pair[..., 0], f_pair[..., 1], x, x_tilde, sig_abs)


def _disarm(f1, f2, x, xt, sig_abs) -> GradEstimate:
    sign = 1.0 - 2.0 * xt  # (-1)^{x_tilde}
    differ = (x != xt).astype(np.float64)
    u = 0.5 * (f1 - f2)[..., None] * sign * differ * sig_abs
    return GradEstimate(u, np.zeros_like(u))


def disarm(batch: SampleBatch) -> GradEstimate:
    """DisARM on a batch of antithetic pairs ``(0, 1), (2, 3), ...``, averaged over pairs."""
    if batch.k % 2:
        raise ValueError(f"disarm needs an even K of antithetic pairs, got K={batch.k}")
    # sigma(|eta|) == max(mu, 1 - mu)
    sig_abs = np.maximum(batch.mu, 1.0 - batch.mu)[..., None, :]
    est = _disarm(batch.fvals[..., 0::2], batch.fvals[..., 1::2],
                  batch.xs[..., 0::2, :], batch.xs[..., 1::2, :], sig_abs)
    u = est.u.mean(axis=-2)
    return GradEstimate(u, np.zeros_like(u))


# -- dispatch by CLI name ----------------------------------------------------

NAMES = ("reinforce", "rloo", "rstar", "double-cv", "double-cv-mf", "half-bxk", "half-bxj", "muprop", "disarm")
NEEDS_MEAN_EVAL = {"double-cv-mf", "muprop"}
ANTITHETIC = {"disarm"}


def min_k(name: str) -> int:
    if name in ("reinforce", "rstar", "muprop"):
        return 1
    return 2


def check_name(name: str, k: int):
    if name not in NAMES:
        raise ValueError(f"unknown estimator {name!r}; choose from {', '.join(NAMES)}")
    if k < min_k(name):
        raise ValueError(f"estimator {name!r} needs K >= {min_k(name)}, got K={k}")
    if name in ANTITHETIC and k % 2:
        raise ValueError(f"estimator {name!r} needs an even K (antithetic pairs), got K={k}")


def estimate(name: str, batch: SampleBatch, f_mu: Optional[ObjectiveEval] = None,
             exact_mean=None) -> GradEstimate:
    if name == "reinforce":
        return reinforce(batch)
    if name == "rloo":
        return rloo(batch)
    if name == "rstar":
        if exact_mean is None:
            raise ValueError("rstar needs the exact mean of f")
        return r_star(batch, exact_mean)
    if name == "double-cv":
        return double_cv_loo(batch)
    if name == "double-cv-mf":
        return double_cv_meanfield(batch, f_mu)
    if name == "half-bxk":
        return half_cv(batch, "bxk_only")
    if name == "half-bxj":
        return half_cv(batch, "bxj_only")
    if name == "muprop":
        return muprop(batch, f_mu)
    if name == "disarm":
        return disarm(batch)
    raise ValueError(f"unknown estimator {name!r}")
