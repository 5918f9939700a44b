"""Exhaustive-enumeration ground truth for small D.

Expectations are probability-weighted sums over every outcome (or every
K-tuple of outcomes), reduced with ``math.fsum`` so results do not depend on
summation order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import bernoulli, estimators
from .estimators import GradEstimate, SampleBatch
from .objectives import Objective, eval_at_mean

MAX_EXACT_DIM = 20
MAX_TUPLES = 1 << 16
MAX_DISARM_DIM = 8

Estimator = Union[str, Callable[[SampleBatch], GradEstimate]]


@dataclass
class OutcomeTable:
    xs: np.ndarray  # (2^D, D), Gray-code order
    probs: np.ndarray
    fvals: np.ndarray
    input_grads: np.ndarray
    scores: np.ndarray


@dataclass
class ExactMoments:
    ef: float
    exact_grad: np.ndarray
    per_outcome: OutcomeTable


def weighted_sum(weights, values) -> np.ndarray:
    """Compensated ``sum_t weights[t] * values[t]`` over the first axis."""
    weights = np.asarray(weights, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    terms = (weights.reshape((-1,) + (1,) * (values.ndim - 1)) * values).reshape(len(weights), -1)
    out = np.array([math.fsum(col) for col in terms.T])
    return out.reshape(values.shape[1:])


def gray_code_outcomes(d: int) -> np.ndarray:
    if d > MAX_EXACT_DIM:
        raise ValueError(f"exact enumeration limited to D <= {MAX_EXACT_DIM}, got D={d}")
    idx = np.arange(1 << d)
    gray = idx ^ (idx >> 1)
    return ((gray[:, None] >> np.arange(d)) & 1).astype(np.float64)


def outcome_table(eta, objective: Objective) -> OutcomeTable:
    eta = bernoulli.as_logits(eta)
    xs = gray_code_outcomes(eta.shape[-1])
    ev = objective.evaluate(xs)
    probs = np.exp(bernoulli.log_prob(eta, xs))
    return OutcomeTable(xs, probs, ev.value, ev.input_grad, bernoulli.score(eta, xs))


def exact_moments(eta, objective: Objective) -> ExactMoments:
    table = outcome_table(eta, objective)
    ef = math.fsum(table.probs * table.fvals)
    grad = weighted_sum(table.probs, table.fvals[:, None] * table.scores)
    return ExactMoments(ef, grad, table)


def _resolve(estimator: Estimator, eta, objective: Objective):
    if callable(estimator):
        return estimator
    name = estimator
    f_mu = eval_at_mean(objective, bernoulli.sigmoid(eta)) if name in estimators.NEEDS_MEAN_EVAL else None
    ef = exact_moments(eta, objective).ef if name == "rstar" else None
    return lambda batch: estimators.estimate(name, batch, f_mu=f_mu, exact_mean=ef)


def _is_disarm(estimator: Estimator) -> bool:
    return estimator in ("disarm",) or estimator is estimators.disarm


def antithetic_cells(eta) -> tuple[np.ndarray, np.ndarray]:
    """All ``3^D`` cells of the shared uniform with their probabilities.

    Per coordinate the uniform splits into ``(0, a)``, ``[a, 1 - a]``,
    ``(1 - a, 1)`` with ``a = min(mu, 1 - mu)``; the antithetic pair is
    constant on each. Returns pairs of shape ``(3^D, 2, D)`` and probabilities.
    """
    eta = bernoulli.as_logits(eta)
    d = eta.shape[-1]
    if d > MAX_DISARM_DIM:
        raise ValueError(f"exact antithetic enumeration limited to D <= {MAX_DISARM_DIM}")
    mu = bernoulli.sigmoid(eta)
    a = np.minimum(mu, 1.0 - mu)
    high = (mu > 0.5).astype(np.float64)
    # (x, x_tilde) on each region; middle region has both bits equal to 1[mu > 1/2]
    bits = np.array([[np.ones(d), np.zeros(d)], [high, high], [np.zeros(d), np.ones(d)]])
    widths = np.array([a, 1.0 - 2.0 * a, a])
    cells = np.array(list(itertools.product(range(3), repeat=d)))
    cols = np.arange(d)
    pairs = bits[cells[:, None, :], np.arange(2)[None, :, None], cols]
    probs = np.prod(widths[cells, cols], axis=-1)
    return pairs, probs


def enumerate_estimates(estimator: Estimator, eta, objective: Objective, k: int):
    """Every sample tuple with its probability and the estimator's ``(u, v)``."""
    eta = bernoulli.as_logits(eta)
    d = eta.shape[-1]
    fn = _resolve(estimator, eta, objective)
    if _is_disarm(estimator):
        if k != 2:
            raise ValueError("exact antithetic enumeration supports K == 2 only")
        xs, probs = antithetic_cells(eta)
        keep = probs > 0
        xs, probs = xs[keep], probs[keep]
        batch = estimators.make_batch(eta, xs, objective)
    else:
        n = 1 << d
        if n ** k > MAX_TUPLES:
            raise ValueError(f"(2^D)^K = {n ** k} tuples exceeds the enumeration limit {MAX_TUPLES}")
        table = outcome_table(eta, objective)
        idx = np.array(list(itertools.product(range(n), repeat=k)))
        probs = np.prod(table.probs[idx], axis=-1)
        mu, covdiag = bernoulli.mean_and_covdiag(eta)
        batch = SampleBatch(table.xs[idx], table.fvals[idx], table.input_grads[idx], table.scores[idx], mu, covdiag)
    est = fn(batch)
    return probs, est


def estimator_expectation_exact(estimator: Estimator, eta, objective: Objective, k: int,
                                alpha: float = 0.0) -> np.ndarray:
    probs, est = enumerate_estimates(estimator, eta, objective, k)
    return weighted_sum(probs, est.at(alpha))


def estimator_variance_exact(estimator: Estimator, eta, objective: Objective, k: int,
                             alpha: float = 0.0) -> float:
    """Total variance ``sum_t p_t ||g_t - E g||^2``."""
    probs, est = enumerate_estimates(estimator, eta, objective, k)
    return _total_variance(probs, est.at(alpha))


def _total_variance(probs, g) -> float:
    mean = weighted_sum(probs, g)
    return math.fsum(probs * np.sum((g - mean) ** 2, axis=-1))


def variance_curve(estimator: Estimator, eta, objective: Objective, k: int, alphas) -> np.ndarray:
    """Exact total variance at each alpha, reusing one enumeration."""
    probs, est = enumerate_estimates(estimator, eta, objective, k)
    return np.array([_total_variance(probs, est.at(a)) for a in alphas])


def rloo_decomposition(eta, objective: Objective, k: int) -> dict:
    """Split RLOO into ``R* + E`` and return exact variances and ``Cov(R*, E)`` (trace)."""
    probs, rl = enumerate_estimates("rloo", eta, objective, k)
    _, rs = enumerate_estimates("rstar", eta, objective, k)
    resid = rl.u - rs.u
    m_rs = weighted_sum(probs, rs.u)
    m_e = weighted_sum(probs, resid)
    cov = math.fsum(probs * np.sum((rs.u - m_rs) * (resid - m_e), axis=-1))
    return {
        "var_rloo": _total_variance(probs, rl.u),
        "var_rstar": _total_variance(probs, rs.u),
        "var_resid": _total_variance(probs, resid),
        "cov_rstar_resid": cov,
        "mean_resid": m_e,
    }


def empirical_variance(estimator: Estimator, eta, objective: Objective, k: int, reps: int,
                       rng: np.random.Generator, alpha: float = 0.0) -> float:
    """Sum over coordinates of the unbiased sample variance across ``reps`` fresh batches."""
    if reps < 2:
        raise ValueError("need at least two replicates")
    eta = bernoulli.as_logits(eta)
    fn = _resolve(estimator, eta, objective)
    etas = np.broadcast_to(eta, (reps,) + eta.shape)
    xs = bernoulli.sample_batch(etas, rng, k, antithetic=_is_disarm(estimator))
    g = fn(estimators.make_batch(eta, xs, objective)).at(alpha)
    return float(np.sum(np.var(g, axis=0, ddof=1)))


# -- reference forms used to cross-check the vectorized estimators ---------------


def rloo_pairwise(batch: SampleBatch) -> np.ndarray:
    """RLOO written with explicit leave-one-out means, one sample at a time."""
    k = batch.k
    out = np.zeros(batch.scores.shape[:-2] + batch.scores.shape[-1:])
    for i in range(k):
        others = [j for j in range(k) if j != i]
        loo = sum(batch.fvals[..., j] for j in others) / (k - 1)
        out = out + (batch.fvals[..., i] - loo)[..., None] * batch.scores[..., i, :]
    return out / k


def double_cv_k2_closed_form(batch: SampleBatch, alpha: float) -> np.ndarray:
    """Two-sample double control variate written via the antisymmetric difference ``Delta``."""
    if batch.k != 2:
        raise ValueError("closed form is for K == 2")
    x1, x2 = batch.xs[..., 0, :], batch.xs[..., 1, :]
    g1, g2 = batch.input_grads[..., 0, :], batch.input_grads[..., 1, :]
    s1, s2 = batch.scores[..., 0, :], batch.scores[..., 1, :]
    mu = batch.mu
    delta = (batch.fvals[..., 0] - batch.fvals[..., 1]
             + alpha * (np.sum(g2 * (x1 - mu), axis=-1) - np.sum(g1 * (x2 - mu), axis=-1)))
    return delta[..., None] * (s1 - s2) / 2.0 - alpha * batch.covdiag * (g1 + g2) / 2.0
