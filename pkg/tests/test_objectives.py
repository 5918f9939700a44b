import math

import numpy as np
import pytest

from doublecv import bernoulli
from doublecv.objectives import (
    ElboObjective,
    MlpParams,
    QuadraticObjective,
    ToyObjective,
    elbo_eval,
    eval_at_mean,
    mlp_eval,
    toy_eval,
)


def test_toy_eval_examples():
    assert toy_eval([1.0]).value == pytest.approx(0.251001, abs=1e-15)
    assert toy_eval([0.0]).value == pytest.approx(0.249001, abs=1e-15)
    ev = toy_eval([0.499])
    assert ev.value == 0.0
    np.testing.assert_array_equal(ev.input_grad, [0.0])
    assert ev.theta_grad is None


def test_toy_binary_and_real_paths_agree():
    obj = ToyObjective(3)
    x = np.array([1.0, 0.0, 1.0])
    assert obj.evaluate(x).value == toy_eval(x).value
    assert obj.evaluate(x.astype(np.float32)).value == pytest.approx(toy_eval(x).value, abs=0)


def test_eval_at_mean_examples():
    obj = ToyObjective(1)
    assert eval_at_mean(obj, [0.5]).value == pytest.approx(1e-6, rel=1e-9)
    np.testing.assert_allclose(eval_at_mean(obj, [0.499]).input_grad, [0.0], atol=0)


def test_toy_rejects_bad_p0():
    with pytest.raises(ValueError):
        toy_eval([1.0], p0=1.5)


def test_quadratic_gradient():
    rng = np.random.default_rng(0)
    obj = QuadraticObjective(rng.normal(size=4), rng.normal(size=(4, 4)), 0.3)
    x = rng.normal(size=4)
    h = 1e-6
    fd = [(obj.evaluate(x + h * e).value - obj.evaluate(x - h * e).value) / (2 * h) for e in np.eye(4)]
    np.testing.assert_allclose(obj.evaluate(x).input_grad, fd, atol=1e-7)


def test_mlp_zero_params_give_zero_output():
    p = MlpParams([np.zeros((3, 2)), np.zeros((4, 3))], [np.zeros(3), np.zeros(4)])
    out, _ = mlp_eval(p, np.array([1.0, -2.0]))
    np.testing.assert_array_equal(out, np.zeros(4))


def test_mlp_identity_like_composition():
    w = 1.7
    p = MlpParams([np.array([[w]]), np.array([[w]])], [np.zeros(1), np.zeros(1)])
    out, _ = mlp_eval(p, np.array([0.8]))
    assert out[0] == pytest.approx(w * w * 0.8, rel=1e-15)


def test_leaky_slope():
    p = MlpParams([np.array([[1.0]]), np.array([[1.0]])], [np.zeros(1), np.zeros(1)])
    out, _ = mlp_eval(p, np.array([-1.0]))
    assert out[0] == pytest.approx(-0.3, rel=1e-15)


def test_mlp_shape_mismatch():
    p = MlpParams.init([3, 4, 2], np.random.default_rng(0))
    with pytest.raises(ValueError):
        mlp_eval(p, np.zeros(5))


def test_elbo_zero_decoder():
    d_obs = 5
    p = MlpParams([np.zeros((4, 1)), np.zeros((d_obs, 4))], [np.zeros(4), np.zeros(d_obs)])
    y = np.array([1.0, 0.0, 1.0, 1.0, 0.0])
    eta = np.array([0.4])
    x = np.array([1.0])
    ev = elbo_eval(p, eta, y, x, "bernoulli")
    expected = d_obs * math.log(0.5) + math.log(0.5) - bernoulli.log_prob(eta, x)
    assert ev.value == pytest.approx(expected, abs=1e-14)


def test_elbo_data_mismatch():
    p = MlpParams.init([2, 3, 4], np.random.default_rng(0))
    with pytest.raises(ValueError, match="binary"):
        ElboObjective(p, np.array([0.2, 0.0, 1.0, 1.0]), np.zeros(2), "bernoulli")
    pg = MlpParams.init([2, 3, 4], np.random.default_rng(0), gaussian=True)
    with pytest.raises(ValueError, match=r"\[-1, 1\]"):
        ElboObjective(pg, np.array([2.0, 0.0, 1.0, 1.0]), np.zeros(2), "gaussian")
    with pytest.raises(ValueError):
        ElboObjective(p, np.zeros(4), np.zeros(2), "poisson")


@pytest.mark.parametrize("likelihood", ["bernoulli", "gaussian"])
def test_elbo_decomposition(likelihood):
    rng = np.random.default_rng(3)
    p = MlpParams.init([3, 4, 4, 6], rng, gaussian=likelihood == "gaussian")
    y = (rng.random(6) < 0.5).astype(float) if likelihood == "bernoulli" else rng.uniform(-1, 1, 6)
    eta = rng.normal(size=3)
    obj = ElboObjective(p, y, eta, likelihood)
    xs = (rng.random((5, 3)) < 0.5).astype(float)
    ev = obj.evaluate(xs)
    out, _ = mlp_eval(p, xs)
    if likelihood == "bernoulli":
        ll = [sum(yi * math.log(1 / (1 + math.exp(-o))) + (1 - yi) * math.log(1 - 1 / (1 + math.exp(-o)))
                  for yi, o in zip(y, row)) for row in out]
    else:
        var = np.exp(p.log_var)
        ll = [sum(-0.5 * ((yi - o) ** 2 / v + math.log(2 * math.pi * v)) for yi, o, v in zip(y, row, var))
              for row in out]
    expected = np.array(ll) - 3 * math.log(2) - bernoulli.log_prob(eta, xs)
    np.testing.assert_allclose(ev.value, expected, atol=1e-10)
    assert ev.theta_grad.shape == (5, p.n_params())


def test_elbo_at_mean_equals_mlp_path():
    rng = np.random.default_rng(4)
    p = MlpParams.init([3, 4, 3], rng)
    eta = rng.normal(size=3)
    obj = ElboObjective(p, np.array([1.0, 0.0, 1.0]), eta, "bernoulli")
    mu, _ = bernoulli.mean_and_covdiag(eta)
    out, _ = mlp_eval(p, mu)
    direct = (np.sum(obj.y * out - np.logaddexp(0, out)) - 3 * math.log(2) - bernoulli.log_prob(eta, mu))
    assert eval_at_mean(obj, mu).value == direct


def test_backward_pass_counter():
    obj = ToyObjective(4)
    obj.evaluate(np.zeros((3, 2, 4)))
    obj.evaluate(np.zeros(4))
    assert obj.backward_passes == 7


def test_flat_roundtrip():
    p = MlpParams.init([3, 5, 2], np.random.default_rng(0), gaussian=True)
    q = p.with_flat(p.flat())
    for a, b in zip(p.arrays(), q.arrays()):
        np.testing.assert_array_equal(a, b)
