"""Training loops for the toy problem and binary-latent VAEs.

Each iteration: draw K samples, evaluate f and its gradients once per sample,
build the estimate ``g = u + alpha v``, ascend on the logits (and on decoder
parameters for the VAE), then take one Adam step on alpha against
``||u + alpha v||^2`` using the same batch.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import bernoulli, estimators
from .alpha import AlphaState, adapt, alpha_grad
from .data import Dataset, load_mnist_idx, synthetic_bars
from .estimators import SampleBatch
from .metrics import StepRecord
from .objectives import MlpParams, ObjectiveEval, ToyObjective, decoder_loglik, mlp_backward, mlp_eval
from .optim import AdamState, adam_step, sgd_step


@dataclass
class ToyConfig:
    dim: int = 200
    p0: float = 0.499


@dataclass
class VaeConfig:
    dataset: str = "synthetic"  # "synthetic" or "idx:IMAGES_PATH"
    likelihood: str = "bernoulli"
    latent: int = 200
    hidden: int = 200
    batch: int = 50
    n_synthetic: int = 512
    probe_batch: int = 50


@dataclass
class TrainConfig:
    estimator: str = "double-cv"
    k: int = 2
    steps: int = 1000
    seed: int = 0
    lr: float = 1e-3  # logits / encoder
    theta_lr: float = 1e-3  # decoder
    alpha_lr: float = 1e-3
    optimizer: str = "adam"
    probe_every: int = 100
    probe_reps: int = 100
    record_time: bool = True
    objective: Union[ToyConfig, VaeConfig] = field(default_factory=ToyConfig)

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.probe_every < 1:
            raise ValueError("probe_every must be >= 1")
        # zero rates are accepted so a run can be frozen
        if min(self.lr, self.theta_lr, self.alpha_lr) < 0:
            raise ValueError("learning rates must be non-negative")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        estimators.check_name(self.estimator, self.k)
        if self.estimator == "rstar" and not isinstance(self.objective, ToyConfig):
            raise ValueError("rstar needs a closed-form mean and is only available for the toy objective")


def _streams(seed: int):
    train, probe, init = np.random.SeedSequence(seed).spawn(3)
    return np.random.default_rng(train), probe, np.random.default_rng(init)


def _draw(eta, rng, k: int, antithetic: bool) -> np.ndarray:
    """K samples per row of ``eta``; antithetic mode stacks K/2 independent pairs."""
    if not antithetic:
        return bernoulli.sample_batch(eta, rng, k)
    lead, d = eta.shape[:-1], eta.shape[-1]
    pairs = bernoulli.sample_batch(np.broadcast_to(eta[..., None, :], lead + (k // 2, d)), rng, 2, antithetic=True)
    return pairs.reshape(lead + (k, d))


class _Updater:
    def __init__(self, optimizer: str, lr: float, maximize: bool = True):
        self.optimizer, self.lr, self.maximize = optimizer, lr, maximize
        self.state = AdamState()

    def __call__(self, params, grads):
        if self.lr == 0:
            return [np.asarray(p, dtype=np.float64) for p in params]
        if self.optimizer == "sgd":
            return sgd_step(params, grads, self.lr, self.maximize)
        params, self.state = adam_step(params, grads, self.state, self.lr, self.maximize)
        return params


class ToyTrainer:
    def __init__(self, config: TrainConfig):
        self.config = config
        obj = config.objective
        self.objective = ToyObjective(obj.dim, obj.p0)
        self._probe_objective = ToyObjective(obj.dim, obj.p0)
        self.rng, self._probe_seed, _ = _streams(config.seed)
        self.eta = np.zeros(obj.dim)
        self.alpha = AlphaState()
        self.t = 0
        self._update = _Updater(config.optimizer, config.lr)
        self._antithetic = config.estimator in estimators.ANTITHETIC

    def _estimate(self, eta, xs, objective):
        name = self.config.estimator
        batch = estimators.make_batch(eta, xs, objective)
        mu = batch.mu
        f_mu = objective.evaluate(mu) if name in estimators.NEEDS_MEAN_EVAL else None
        ef = objective.exact_mean(mu) if name == "rstar" else None
        return estimators.estimate(name, batch, f_mu=f_mu, exact_mean=ef)

    def step(self) -> dict:
        cfg = self.config
        xs = _draw(self.eta, self.rng, cfg.k, self._antithetic)
        est = self._estimate(self.eta, xs, self.objective)
        alpha_used = self.alpha.alpha
        g = est.at(alpha_used)
        (self.eta,) = self._update([self.eta], [g])
        if cfg.alpha_lr > 0:
            self.alpha = adapt(self.alpha, alpha_grad(est, alpha_used), cfg.alpha_lr)
        self.t += 1
        return {"alpha_used": alpha_used, "grad": g}

    def probe(self) -> float:
        """Gradient variance at frozen parameters from fresh batches.

        Every probe reuses the same uniforms (common random numbers), so probes
        differ only through the parameters.
        """
        cfg = self.config
        if cfg.probe_reps < 2:
            return math.nan
        rng = np.random.default_rng(self._probe_seed)
        etas = np.broadcast_to(self.eta, (cfg.probe_reps, self.eta.shape[0]))
        xs = _draw(etas, rng, cfg.k, self._antithetic)
        g = self._estimate(self.eta, xs, self._probe_objective).at(self.alpha.alpha)
        return float(np.sum(np.var(g, axis=0, ddof=1)))

    def record(self, wall: float) -> StepRecord:
        mu = bernoulli.sigmoid(self.eta)
        return StepRecord(self.t, self.objective.exact_mean(mu), self.probe(), self.alpha.alpha,
                          float(np.mean(mu)), wall, self.objective.backward_passes)


class VaeTrainer:
    """Amortized binary-latent VAE: MLP encoder gives logits, MLP decoder gives the likelihood."""

    def __init__(self, config: TrainConfig, dataset: Optional[Dataset] = None):
        self.config = config
        vc = config.objective
        self.rng, probe_seed, init_rng = _streams(config.seed)
        self.likelihood = vc.likelihood
        if dataset is None:
            dataset = load_dataset(vc.dataset, vc.likelihood, vc.n_synthetic)
        self.dataset = dataset
        self.gaussian = vc.likelihood == "gaussian"
        d_obs = dataset.pixels.shape[1]
        self.encoder = MlpParams.init([d_obs, vc.hidden, vc.hidden, vc.latent], init_rng)
        self.decoder = MlpParams.init([vc.latent, vc.hidden, vc.hidden, d_obs], init_rng, gaussian=self.gaussian)
        self.alpha = AlphaState()
        self.t = 0
        self.backward_passes = 0
        self._enc_update = _Updater(config.optimizer, config.lr)
        self._dec_update = _Updater(config.optimizer, config.theta_lr)
        self._antithetic = config.estimator in estimators.ANTITHETIC
        self._order = np.empty(0, dtype=np.int64)
        self._epoch_data = None
        self._elbo_sum, self._elbo_n = 0.0, 0
        self._probe_seed = probe_seed
        probe_rng = np.random.default_rng(probe_seed)
        idx = probe_rng.choice(len(dataset), size=min(vc.probe_batch, len(dataset)), replace=False)
        self._probe_y = self._view(dataset, probe_rng)[idx]

    def _view(self, dataset: Dataset, rng) -> np.ndarray:
        return dataset.continuous() if self.gaussian else dataset.binarize(rng)

    def _next_batch(self) -> np.ndarray:
        b = self.config.objective.batch
        if len(self._order) < b:
            # new epoch: reshuffle and redraw binarization
            self._epoch_data = self._view(self.dataset, self.rng)
            self._order = self.rng.permutation(len(self.dataset))
        idx, self._order = self._order[:b], self._order[b:]
        return self._epoch_data[idx]

    def _evaluate(self, y, eta, xs, count: bool):
        """Decoder pass at every sample plus the estimate; leading axes of ``xs`` are free."""
        cfg = self.config
        ll, grad_x, dec_grads = decoder_loglik(self.decoder, y[..., None, :], xs, self.likelihood)
        if count:
            self.backward_passes += int(np.prod(xs.shape[:-1]))
        log_prior = -eta.shape[-1] * math.log(2.0)
        mu, covdiag = bernoulli.mean_and_covdiag(eta)
        batch = SampleBatch(xs, ll + log_prior, grad_x, xs - mu[..., None, :], mu, covdiag)
        f_mu = None
        if cfg.estimator in estimators.NEEDS_MEAN_EVAL:
            ll_mu, grad_mu, _ = decoder_loglik(self.decoder, y, mu, self.likelihood)
            if count:
                self.backward_passes += int(np.prod(mu.shape[:-1]))
            f_mu = ObjectiveEval(ll_mu + log_prior, grad_mu)
        est = estimators.estimate(cfg.estimator, batch, f_mu=f_mu)
        elbo = ll + log_prior - bernoulli.log_prob(eta[..., None, :], xs)
        return est, dec_grads, elbo

    def step(self) -> dict:
        cfg = self.config
        y = self._next_batch()
        eta, enc_tape = mlp_eval(self.encoder, y)
        xs = _draw(eta, self.rng, cfg.k, self._antithetic)
        est, dec_grads, elbo = self._evaluate(y, eta, xs, count=True)
        alpha_used = self.alpha.alpha
        # the -log q term of the ELBO enters through its analytic entropy gradient
        g_eta = est.at(alpha_used) + bernoulli.entropy_grad(eta)
        _, enc_grads = mlp_backward(self.encoder, enc_tape, g_eta / y.shape[0])
        n_samples = xs.shape[0] * xs.shape[1]
        self.encoder = MlpParams.from_arrays(self._enc_update(self.encoder.arrays(), enc_grads), False)
        self.decoder = MlpParams.from_arrays(
            self._dec_update(self.decoder.arrays(), [g / n_samples for g in dec_grads]), self.gaussian)
        if cfg.alpha_lr > 0:
            self.alpha = adapt(self.alpha, alpha_grad(est, alpha_used), cfg.alpha_lr)
        elbo = float(np.mean(elbo))
        self._elbo_sum += elbo
        self._elbo_n += 1
        self.t += 1
        return {"alpha_used": alpha_used, "elbo": elbo}

    def probe(self) -> float:
        """Variance of the logit-space gradient over the fixed probe minibatch (common random numbers)."""
        cfg = self.config
        if cfg.probe_reps < 2:
            return math.nan
        rng = np.random.default_rng(self._probe_seed)
        reps = cfg.probe_reps
        y = np.broadcast_to(self._probe_y, (reps,) + self._probe_y.shape)
        eta, _ = mlp_eval(self.encoder, self._probe_y)
        eta = np.broadcast_to(eta, (reps,) + eta.shape)
        xs = _draw(eta, rng, cfg.k, self._antithetic)
        est, _, _ = self._evaluate(y, eta, xs, count=False)
        g = est.at(self.alpha.alpha).reshape(reps, -1)
        return float(np.sum(np.var(g, axis=0, ddof=1)))

    def record(self, wall: float) -> StepRecord:
        if self._elbo_n:
            objective = self._elbo_sum / self._elbo_n
        else:
            objective = math.nan
        self._elbo_sum, self._elbo_n = 0.0, 0
        eta, _ = mlp_eval(self.encoder, self._probe_y)
        return StepRecord(self.t, objective, self.probe(), self.alpha.alpha,
                          float(np.mean(bernoulli.sigmoid(eta))), wall, self.backward_passes)


def load_dataset(source: str, likelihood: str, n_synthetic: int = 512) -> Dataset:
    if source == "synthetic":
        return synthetic_bars(n_synthetic, binary=likelihood == "bernoulli")
    if source.startswith("idx:"):
        return load_mnist_idx(source[len("idx:"):])
    raise ValueError(f"unknown dataset {source!r}; use 'synthetic' or 'idx:PATH'")


def make_trainer(config: TrainConfig, dataset: Optional[Dataset] = None):
    if isinstance(config.objective, ToyConfig):
        return ToyTrainer(config)
    return VaeTrainer(config, dataset)


def run_training(config: TrainConfig, dataset: Optional[Dataset] = None) -> list[StepRecord]:
    """Run ``config.steps`` iterations, recording every ``probe_every`` steps and at the end."""
    trainer = make_trainer(config, dataset)
    start = time.perf_counter()
    records = []
    for _ in range(config.steps):
        trainer.step()
        if trainer.t % config.probe_every == 0 or trainer.t == config.steps:
            wall = time.perf_counter() - start if config.record_time else 0.0
            records.append(trainer.record(wall))
    return records
