"""Factorized Bernoulli distribution over {0,1}^D, parameterized by logits."""

from __future__ import annotations

import numpy as np


def as_logits(eta) -> np.ndarray:
    """Validate and return logits as a float64 array (last axis is D)."""
    eta = np.asarray(eta, dtype=np.float64)
    if eta.ndim == 0 or eta.shape[-1] < 1:
        raise ValueError("logits must have at least one dimension with D >= 1")
    if not np.all(np.isfinite(eta)):
        raise ValueError("logits must be finite")
    return eta


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def log_sigmoid(z):
    return -np.logaddexp(0.0, -np.asarray(z, dtype=np.float64))


def mean_and_covdiag(eta):
    """Return ``(mu, mu * (1 - mu))``.

    ``mu * (1 - mu)`` is the diagonal of ``E[s(x) (x - mu)^T]``, which is
    exactly diagonal for a factorized Bernoulli.
    """
    eta = as_logits(eta)
    mu = sigmoid(eta)
    # sigma(eta) * sigma(-eta) avoids cancellation in 1 - mu for large eta
    return mu, mu * sigmoid(-eta)


def log_prob(eta, x) -> np.ndarray:
    """Log-probability of ``x`` under the factorized Bernoulli, summed over the last axis.

    Broadcasts over leading axes. Accepts real-valued ``x`` (the same formula
    then gives the cross-entropy form).
    """
    eta = as_logits(eta)
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != eta.shape[-1]:
        raise ValueError(f"dimension mismatch: x has D={x.shape[-1]}, eta has D={eta.shape[-1]}")
    return np.sum(x * log_sigmoid(eta) + (1.0 - x) * log_sigmoid(-eta), axis=-1)


def score(eta, x) -> np.ndarray:
    """Score ``d/d eta log q(x) = x - sigmoid(eta)``."""
    eta = as_logits(eta)
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != eta.shape[-1]:
        raise ValueError(f"dimension mismatch: x has D={x.shape[-1]}, eta has D={eta.shape[-1]}")
    return x - sigmoid(eta)


def entropy(eta) -> np.ndarray:
    eta = as_logits(eta)
    mu = sigmoid(eta)
    return -np.sum(mu * log_sigmoid(eta) + (1.0 - mu) * log_sigmoid(-eta), axis=-1)


def entropy_grad(eta) -> np.ndarray:
    """Gradient of the entropy w.r.t. the logits: ``-eta * mu * (1 - mu)``."""
    mu, covdiag = mean_and_covdiag(eta)
    return -np.asarray(eta) * covdiag


def bits_from_uniforms(mu, u, antithetic: bool = False) -> np.ndarray:
    """Threshold uniforms into bits with the strict rule ``u < mu``.

    In antithetic mode ``u`` has shape (..., D) and the result stacks
    ``(1[u < mu], 1[1 - u < mu])`` on a new axis -2.
    """
    mu = np.asarray(mu, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    if antithetic:
        return np.stack([u < mu, (1.0 - u) < mu], axis=-2).astype(np.float64)
    return (u < mu).astype(np.float64)


def sample_batch(eta, rng: np.random.Generator, k: int, antithetic: bool = False) -> np.ndarray:
    """Draw ``k`` binary samples, shape ``eta.shape[:-1] + (k, D)``."""
    eta = as_logits(eta)
    if k < 1:
        raise ValueError("k must be >= 1")
    if antithetic and k != 2:
        raise ValueError(f"antithetic sampling requires k == 2, got k={k}")
    mu = sigmoid(eta)[..., None, :]
    lead = eta.shape[:-1]
    d = eta.shape[-1]
    if antithetic:
        u = rng.random(lead + (d,))
        return bits_from_uniforms(mu[..., 0, :], u, antithetic=True)
    u = rng.random(lead + (k, d))
    return bits_from_uniforms(mu, u)
