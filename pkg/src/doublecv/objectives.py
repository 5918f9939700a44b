"""Objective functions f(x) returning value, input gradient and parameter gradient.

Every objective is defined on real-valued inputs so that it can also be
evaluated at the mean vector. Evaluation broadcasts over leading axes: ``x`` of
shape ``(..., D)`` gives values of shape ``(...)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import bernoulli

LEAKY_SLOPE = 0.3
LOG_2PI = math.log(2.0 * math.pi)


@dataclass
class ObjectiveEval:
    value: np.ndarray
    input_grad: np.ndarray
    theta_grad: Optional[np.ndarray] = None


class Objective:
    """Base class. Subclasses implement ``_evaluate``; ``evaluate`` counts backward passes."""

    dim: int

    def __init__(self):
        self.backward_passes = 0

    def evaluate(self, x) -> ObjectiveEval:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.dim:
            raise ValueError(f"expected inputs with D={self.dim}, got shape {x.shape}")
        self.backward_passes += int(np.prod(x.shape[:-1], dtype=np.int64))
        return self._evaluate(x)

    def _evaluate(self, x: np.ndarray) -> ObjectiveEval:
        raise NotImplementedError

    def exact_mean(self, mu) -> float:
        """Closed-form ``E_q[f]``; only some objectives provide it."""
        raise NotImplementedError(f"{type(self).__name__} has no closed-form mean")


def eval_at_mean(objective: Objective, mu) -> ObjectiveEval:
    return objective.evaluate(mu)


# -- toy quadratic ---------------------------------------------------------


def toy_eval(x, p0: float = 0.499) -> ObjectiveEval:
    """``f(x) = mean_i (x_i - p0)^2`` and its input gradient."""
    if not 0.0 < p0 < 1.0:
        raise ValueError("p0 must lie in (0, 1)")
    x = np.asarray(x, dtype=np.float64)
    d = x.shape[-1]
    diff = x - p0
    return ObjectiveEval(np.mean(diff * diff, axis=-1), (2.0 / d) * diff, None)


class ToyObjective(Objective):
    def __init__(self, dim: int, p0: float = 0.499):
        super().__init__()
        if not 0.0 < p0 < 1.0:
            raise ValueError("p0 must lie in (0, 1)")
        self.dim = dim
        self.p0 = p0

    def _evaluate(self, x):
        return toy_eval(x, self.p0)

    def exact_mean(self, mu) -> float:
        mu = np.asarray(mu, dtype=np.float64)
        p0 = self.p0
        return float(np.mean(mu * (1.0 - p0) ** 2 + (1.0 - mu) * p0 ** 2))

    def exact_grad(self, eta) -> np.ndarray:
        mu, covdiag = bernoulli.mean_and_covdiag(eta)
        return covdiag * (1.0 - 2.0 * self.p0) / self.dim


class QuadraticObjective(Objective):
    """``f(x) = x^T A x + b^T x + c``; linear when ``A`` is zero."""

    def __init__(self, b, a=None, c: float = 0.0):
        super().__init__()
        self.b = np.asarray(b, dtype=np.float64)
        self.dim = self.b.shape[0]
        self.a = np.zeros((self.dim, self.dim)) if a is None else np.asarray(a, dtype=np.float64)
        self.c = float(c)

    def _evaluate(self, x):
        ax = x @ self.a.T
        value = np.sum(x * ax, axis=-1) + x @ self.b + self.c
        grad = ax + x @ self.a + self.b
        return ObjectiveEval(value, grad, None)


# -- MLP ---------------------------------------------------------------------


@dataclass
class MlpParams:
    """Fully connected net ``sizes[0] -> ... -> sizes[-1]`` with LeakyReLU hidden units.

    ``weights[l]`` has shape ``(out, in)``. ``log_var`` is the per-output
    log-variance of a Gaussian likelihood, or None.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    log_var: Optional[np.ndarray] = None

    @classmethod
    def init(cls, sizes, rng: np.random.Generator, gaussian: bool = False, scale: float = 1.0):
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            lim = scale / math.sqrt(fan_in)
            weights.append(rng.uniform(-lim, lim, size=(fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        log_var = np.zeros(sizes[-1]) if gaussian else None
        return cls(weights, biases, log_var)

    @property
    def sizes(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    def arrays(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        if self.log_var is not None:
            out.append(self.log_var)
        return out

    @classmethod
    def from_arrays(cls, arrays, gaussian: bool):
        arrays = list(arrays)
        log_var = arrays.pop() if gaussian else None
        return cls(arrays[0::2], arrays[1::2], log_var)

    def n_params(self) -> int:
        return sum(a.size for a in self.arrays())

    def flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays()])

    def with_flat(self, theta) -> "MlpParams":
        theta = np.asarray(theta, dtype=np.float64)
        arrays, i = [], 0
        for a in self.arrays():
            arrays.append(theta[i:i + a.size].reshape(a.shape))
            i += a.size
        return MlpParams.from_arrays(arrays, self.log_var is not None)


@dataclass
class MlpTape:
    inputs: list[np.ndarray] = field(default_factory=list)  # input to each layer
    pre: list[np.ndarray] = field(default_factory=list)  # pre-activation of each layer


def leaky_relu(z):
    return np.where(z > 0, z, LEAKY_SLOPE * z)


def mlp_eval(params: MlpParams, x) -> tuple[np.ndarray, MlpTape]:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.weights[0].shape[1]:
        raise ValueError(f"input width {x.shape[-1]} does not match first layer {params.weights[0].shape[1]}")
    tape = MlpTape()
    h = x
    n = len(params.weights)
    for layer, (w, b) in enumerate(zip(params.weights, params.biases)):
        tape.inputs.append(h)
        z = h @ w.T + b
        tape.pre.append(z)
        h = leaky_relu(z) if layer < n - 1 else z
    return h, tape


def mlp_backward(params: MlpParams, tape: MlpTape, grad_out, per_sample: bool = False):
    """Backpropagate ``grad_out`` (d objective / d output).

    Returns ``(grad_input, [dW1, db1, dW2, db2, ...])``. Parameter gradients are
    summed over all leading axes, or kept per sample (leading axes preserved)
    when ``per_sample`` is set.
    """
    delta = np.asarray(grad_out, dtype=np.float64)
    n = len(params.weights)
    grads = [None] * (2 * n)
    lead = delta.shape[:-1]
    for layer in range(n - 1, -1, -1):
        if layer < n - 1:
            delta = np.where(tape.pre[layer] > 0, delta, LEAKY_SLOPE * delta)
        h = tape.inputs[layer]
        if per_sample:
            grads[2 * layer] = delta[..., :, None] * h[..., None, :]
            grads[2 * layer + 1] = delta
        else:
            d2 = delta.reshape(-1, delta.shape[-1])
            grads[2 * layer] = d2.T @ h.reshape(-1, h.shape[-1])
            grads[2 * layer + 1] = d2.sum(axis=0)
        delta = delta @ params.weights[layer]
    assert delta.shape[:-1] == lead
    return delta, grads


# -- decoder likelihoods and the ELBO --------------------------------------


def check_data(y, likelihood: str) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if likelihood == "bernoulli":
        if not np.all((y == 0.0) | (y == 1.0)):
            raise ValueError("bernoulli likelihood requires binary data")
    elif likelihood == "gaussian":
        if not np.all(np.abs(y) <= 1.0):
            raise ValueError("gaussian likelihood expects data centered in [-1, 1]")
    else:
        raise ValueError(f"unknown likelihood {likelihood!r}")
    return y


def decoder_loglik(params: MlpParams, y, x, likelihood: str, per_sample_theta: bool = False):
    """``log p(y | x)`` with one forward and one backward pass.

    ``y`` broadcasts against the leading axes of ``x``. Returns
    ``(loglik, grad_x, theta_grads)`` where ``theta_grads`` follows
    ``params.arrays()`` order.
    """
    out, tape = mlp_eval(params, x)
    y = np.broadcast_to(y, out.shape)
    if likelihood == "bernoulli":
        ll = np.sum(y * out - np.logaddexp(0.0, out), axis=-1)
        d_out = y - bernoulli.sigmoid(out)
        extra = []
    elif likelihood == "gaussian":
        if params.log_var is None:
            raise ValueError("gaussian likelihood needs params with log_var")
        inv_var = np.exp(-params.log_var)
        r2 = (y - out) ** 2 * inv_var
        ll = -0.5 * np.sum(r2 + params.log_var + LOG_2PI, axis=-1)
        d_out = (y - out) * inv_var
        d_lv = 0.5 * (r2 - 1.0)
        extra = [d_lv if per_sample_theta else d_lv.reshape(-1, d_lv.shape[-1]).sum(axis=0)]
    else:
        raise ValueError(f"unknown likelihood {likelihood!r}")
    grad_x, grads = mlp_backward(params, tape, d_out, per_sample=per_sample_theta)
    return ll, grad_x, grads + extra


def flatten_per_sample(grads, lead_shape) -> np.ndarray:
    return np.concatenate([g.reshape(lead_shape + (-1,)) for g in grads], axis=-1)


class ElboObjective(Objective):
    """Single-datapoint ELBO ``log p(y|x) + log p(x) - log q_eta(x)`` at fixed ``eta``.

    The prior is uniform, ``p(x) = 2^-D``. ``input_grad`` covers only the decoder
    term; ``theta_grad`` is the per-sample gradient w.r.t. the flattened decoder
    parameters.
    """

    def __init__(self, params: MlpParams, y, eta, likelihood: str):
        super().__init__()
        self.params = params
        self.likelihood = likelihood
        self.y = check_data(y, likelihood)
        self.eta = bernoulli.as_logits(eta)
        self.dim = self.eta.shape[-1]
        if params.sizes[0] != self.dim or params.sizes[-1] != self.y.shape[-1]:
            raise ValueError("decoder shape does not match latent and data dimensions")

    def _evaluate(self, x):
        ll, grad_x, grads = decoder_loglik(self.params, self.y, x, self.likelihood, per_sample_theta=True)
        log_prior = -self.dim * math.log(2.0)
        value = ll + log_prior - bernoulli.log_prob(self.eta, x)
        return ObjectiveEval(value, grad_x, flatten_per_sample(grads, x.shape[:-1]))


def elbo_eval(params: MlpParams, eta, y, x, likelihood: str) -> ObjectiveEval:
    return ElboObjective(params, y, eta, likelihood).evaluate(x)
