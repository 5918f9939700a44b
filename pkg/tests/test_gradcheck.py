import numpy as np
import pytest

from doublecv.gates import tiny_elbo

from gradcheck import check_elbo


@pytest.mark.parametrize("likelihood", ["bernoulli", "gaussian"])
@pytest.mark.parametrize("seed", range(5))
def test_elbo_gradients_match_finite_differences(likelihood, seed):
    rng = np.random.default_rng(seed)
    obj = tiny_elbo(4, rng, hidden=4, d_obs=4, likelihood=likelihood)
    x = (rng.random(4) < 0.5).astype(float)
    theta_err, input_err = check_elbo(obj, x)
    assert theta_err < 1e-5
    assert input_err < 1e-5


def test_gradients_at_real_valued_mean():
    rng = np.random.default_rng(11)
    obj = tiny_elbo(3, rng)
    mu = 1 / (1 + np.exp(-obj.eta))
    theta_err, input_err = check_elbo(obj, mu)
    assert theta_err < 1e-5 and input_err < 1e-5
