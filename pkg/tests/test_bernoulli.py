import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from doublecv import bernoulli
from doublecv.oracle import gray_code_outcomes

logits = st.integers(1, 8).flatmap(
    lambda d: arrays(np.float64, d, elements=st.floats(-6, 6, allow_nan=False)))


def test_mean_and_covdiag_examples():
    mu, cov = bernoulli.mean_and_covdiag([0.0])
    assert mu[0] == 0.5 and cov[0] == 0.25
    mu, cov = bernoulli.mean_and_covdiag(np.zeros(200))
    assert np.all(mu == 0.5)
    mu, cov = bernoulli.mean_and_covdiag([math.log(3.0)])
    np.testing.assert_allclose(mu, [0.75], rtol=1e-15)
    np.testing.assert_allclose(cov, [0.1875], rtol=1e-15)


def test_rejects_non_finite_logits():
    with pytest.raises(ValueError):
        bernoulli.mean_and_covdiag([0.0, np.inf])
    with pytest.raises(ValueError):
        bernoulli.as_logits(np.zeros(0))


def test_log_prob_examples():
    assert bernoulli.log_prob([0.0], [1.0]) == pytest.approx(-0.693147, abs=1e-6)
    assert bernoulli.log_prob([0.0, 0.0], [1.0, 0.0]) == pytest.approx(2 * math.log(0.5), abs=1e-15)
    assert bernoulli.log_prob([math.log(3.0)], [0.0]) == pytest.approx(math.log(0.25), abs=1e-15)


def test_log_prob_stable_for_large_logits():
    # naive log(1 - sigmoid(40)) is -inf in float64
    assert bernoulli.log_prob([40.0], [0.0]) == pytest.approx(-40.0, rel=1e-12)
    assert bernoulli.log_prob([-40.0], [0.0]) == pytest.approx(-math.exp(-40.0), rel=1e-9)


def test_score_examples():
    np.testing.assert_array_equal(bernoulli.score([0.0], [1.0]), [0.5])
    np.testing.assert_array_equal(bernoulli.score([0.0], [0.0]), [-0.5])


def test_score_matches_finite_difference_of_log_prob():
    rng = np.random.default_rng(0)
    eta = rng.normal(size=5)
    x = (rng.random(5) < 0.5).astype(float)
    h = 1e-6
    fd = [(bernoulli.log_prob(eta + h * e, x) - bernoulli.log_prob(eta - h * e, x)) / (2 * h) for e in np.eye(5)]
    np.testing.assert_allclose(bernoulli.score(eta, x), fd, atol=1e-8)


@settings(max_examples=60, deadline=None)
@given(logits)
def test_score_identity_and_covariance_identity(eta):
    xs = gray_code_outcomes(len(eta))
    q = np.exp(bernoulli.log_prob(eta, xs))
    s = bernoulli.score(eta, xs)
    mu, cov = bernoulli.mean_and_covdiag(eta)
    assert abs(q.sum() - 1.0) < 1e-12
    np.testing.assert_allclose(q @ s, 0.0, atol=1e-12)
    m = (q[:, None] * s).T @ (xs - mu)
    np.testing.assert_allclose(m, np.diag(cov), atol=1e-12)


def test_bits_from_uniforms_examples():
    assert bernoulli.bits_from_uniforms([0.5], [0.3])[0] == 1.0
    np.testing.assert_array_equal(bernoulli.bits_from_uniforms([0.9], [0.3], antithetic=True), [[1.0], [1.0]])
    # strict inequality at the tie
    assert bernoulli.bits_from_uniforms([0.5], [0.5])[0] == 0.0


@pytest.mark.parametrize("mu", [0.1, 0.3, 0.5, 0.75, 0.95])
def test_antithetic_marginals_exact(mu):
    # regions (0, a), [a, 1 - a], (1 - a, 1) with a = min(mu, 1 - mu)
    a = min(mu, 1 - mu)
    widths = [a, 1 - 2 * a, a]
    reps = [a / 2, 0.5, 1 - a / 2]
    pairs = [bernoulli.bits_from_uniforms([mu], [u], antithetic=True)[:, 0] for u in reps]
    p_x = sum(w * p[0] for w, p in zip(widths, pairs))
    p_xt = sum(w * p[1] for w, p in zip(widths, pairs))
    assert p_x == pytest.approx(mu, abs=1e-15)
    assert p_xt == pytest.approx(mu, abs=1e-15)


def test_sample_batch_shapes_and_determinism():
    eta = np.linspace(-2, 2, 7)
    a = bernoulli.sample_batch(eta, np.random.default_rng(5), 4)
    b = bernoulli.sample_batch(eta, np.random.default_rng(5), 4)
    assert a.shape == (4, 7)
    np.testing.assert_array_equal(a, b)
    assert set(np.unique(a)) <= {0.0, 1.0}
    pair = bernoulli.sample_batch(eta, np.random.default_rng(5), 2, antithetic=True)
    assert pair.shape == (2, 7)


def test_sample_batch_frequencies():
    eta = np.array([-1.0, 0.0, 2.0])
    xs = bernoulli.sample_batch(np.broadcast_to(eta, (20000, 3)), np.random.default_rng(1), 2)
    mu, _ = bernoulli.mean_and_covdiag(eta)
    np.testing.assert_allclose(xs.mean(axis=(0, 1)), mu, atol=0.01)


def test_antithetic_requires_two_samples():
    with pytest.raises(ValueError, match="k == 2"):
        bernoulli.sample_batch([0.0], np.random.default_rng(0), 3, antithetic=True)
    with pytest.raises(ValueError):
        bernoulli.sample_batch([0.0], np.random.default_rng(0), 0)


def test_entropy_grad_matches_finite_difference():
    eta = np.array([-1.3, 0.2, 2.5])
    h = 1e-6
    fd = [(bernoulli.entropy(eta + h * e) - bernoulli.entropy(eta - h * e)) / (2 * h) for e in np.eye(3)]
    np.testing.assert_allclose(bernoulli.entropy_grad(eta), fd, atol=1e-8)
