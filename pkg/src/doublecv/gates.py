"""Oracle gate suite behind ``doublecv check``.

Each gate enumerates small instances exhaustively and returns a
:class:`GateResult`; any failure makes the CLI exit nonzero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import estimators, oracle
from .objectives import ElboObjective, MlpParams, QuadraticObjective, ToyObjective


@dataclass
class GateResult:
    name: str
    passed: bool
    detail: str


def tiny_elbo(d: int, rng: np.random.Generator, hidden: int = 4, d_obs: int = 3,
              likelihood: str = "bernoulli") -> ElboObjective:
    params = MlpParams.init([d, hidden, d_obs], rng, gaussian=likelihood == "gaussian", scale=2.0)
    # nonzero biases keep binary inputs away from the LeakyReLU kink
    params.biases = [rng.normal(0, 0.5, b.shape) for b in params.biases]
    if likelihood == "bernoulli":
        y = (rng.random(d_obs) < 0.5).astype(float)
    else:
        y = rng.uniform(-1, 1, d_obs)
        params.log_var = rng.normal(0, 0.3, d_obs)
    return ElboObjective(params, y, rng.normal(0, 1, d), likelihood)


def relative_error(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def gate_unbiasedness(draws: int = 20, seed: int = 0, tol: float = 1e-10) -> GateResult:
    rng = np.random.default_rng(seed)
    worst, where = 0.0, ""
    for d in (1, 2, 3):
        for k in (2, 3):
            for kind in ("toy", "elbo"):
                for _ in range(draws):
                    obj = ToyObjective(d) if kind == "toy" else tiny_elbo(d, rng)
                    eta = rng.normal(0, 1.5, d)
                    alpha = rng.uniform(-2, 2)
                    exact = oracle.exact_moments(eta, obj).exact_grad
                    names = [n for n in estimators.NAMES if n != "disarm"] + (["disarm"] if k == 2 else [])
                    for name in names:
                        got = oracle.estimator_expectation_exact(name, eta, obj, k, alpha)
                        err = relative_error(got, exact)
                        if err > worst:
                            worst, where = err, f"{name} D={d} K={k} {kind}"
    return GateResult("unbiasedness", worst < tol, f"max relative error {worst:.2e} ({where})")


def gate_rloo_bound(instances: int = 100, seed: int = 1, tol: float = 1e-10) -> GateResult:
    rng = np.random.default_rng(seed)
    ok, worst_cov = True, 0.0
    for i in range(instances):
        d = int(rng.integers(1, 4))
        k = int(rng.integers(2, 4))
        obj = QuadraticObjective(rng.normal(size=d), rng.normal(size=(d, d)), rng.normal())
        dec = oracle.rloo_decomposition(rng.normal(0, 1.5, d), obj, k)
        ok &= dec["var_rloo"] >= dec["var_rstar"]
        worst_cov = max(worst_cov, abs(dec["cov_rstar_resid"]))
    return GateResult("rloo_bounded_by_rstar", bool(ok and worst_cov < tol),
                      f"Var(RLOO) >= Var(R*) on all: {bool(ok)}; max |Cov(R*, E)| {worst_cov:.2e}")


def gate_linear_zero_variance(instances: int = 20, seed: int = 2, tol: float = 1e-12) -> GateResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        d = int(rng.integers(1, 9))
        k = 2 if d > 4 else int(rng.integers(2, 4))
        obj = QuadraticObjective(rng.normal(size=d), None, rng.normal())
        eta = rng.normal(0, 1.5, d)
        exact = oracle.exact_moments(eta, obj).exact_grad
        _, est = oracle.enumerate_estimates("double-cv-mf", eta, obj, k)
        worst = max(worst, float(np.max(np.abs(est.at(-1.0) - exact))))
    return GateResult("linear_zero_variance", worst < tol, f"max deviation {worst:.2e}")


def gate_covariance_form(batches: int = 1000, seed: int = 3, tol: float = 1e-14) -> GateResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(batches):
        d = int(rng.integers(1, 6))
        k = int(rng.integers(2, 6))
        eta = rng.normal(0, 1.5, d)
        obj = ToyObjective(d)
        xs = (rng.random((k, d)) < 0.5).astype(float)
        batch = estimators.make_batch(eta, xs, obj)
        worst = max(worst, float(np.max(np.abs(estimators.rloo(batch).u - oracle.rloo_pairwise(batch)))))
    return GateResult("rloo_covariance_form", worst < tol, f"max deviation {worst:.2e}")


def run_all() -> list[GateResult]:
    return [gate_unbiasedness(), gate_rloo_bound(), gate_linear_zero_variance(), gate_covariance_form()]
