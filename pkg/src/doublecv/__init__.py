"""Double control variate gradient estimators for factorized Bernoulli latent variables."""

from .alpha import AlphaState, adapt, alpha_grad, optimal_alpha_k2
from .bernoulli import log_prob, mean_and_covdiag, sample_batch, score
from .estimators import (
    GradEstimate,
    SampleBatch,
    disarm,
    disarm_k2,
    double_cv_loo,
    double_cv_meanfield,
    half_cv,
    make_batch,
    muprop,
    r_star,
    reinforce,
    rloo,
)
from .objectives import ElboObjective, MlpParams, ObjectiveEval, QuadraticObjective, ToyObjective
from .oracle import (
    empirical_variance,
    estimator_expectation_exact,
    estimator_variance_exact,
    exact_moments,
)
from .training import ToyConfig, TrainConfig, VaeConfig, run_training

__version__ = "0.1.0"
