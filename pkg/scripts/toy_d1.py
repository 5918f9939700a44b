"""One-dimensional toy problem: variance traces, plus exact variances from enumeration."""

import numpy as np
from _common import fraction_below, parser, save, table

from doublecv import bernoulli, oracle
from doublecv.alpha import k2_regression_pair, optimal_alpha_k2
from doublecv.objectives import ToyObjective
from doublecv.training import ToyConfig, TrainConfig, run_training

ESTIMATORS = ("double-cv", "rloo", "rstar", "reinforce")


def main():
    args = parser(__doc__, 10_000, "results/toy_d1").parse_args()
    runs = {
        est: run_training(TrainConfig(estimator=est, k=2, steps=args.steps, seed=args.seed,
                                      objective=ToyConfig(1, 0.499), record_time=False))
        for est in ESTIMATORS
    }
    save(runs, args.out)
    table(runs, every=10)
    print(f"\ndouble-cv <= rloo at {fraction_below(runs['double-cv'], runs['rloo'], 1000):.0%} "
          "of probes after step 1000")

    obj = ToyObjective(1)
    print("\nexact variance (K=2) along a logit sweep, double-cv at its optimal alpha")
    print("eta".rjust(8) + "mu".rjust(10) + "alpha*".rjust(12) + "rloo".rjust(14) + "rstar".rjust(14)
          + "double-cv".rjust(14))
    for eta in (-2.0, -1.0, 0.0, 1.0, 2.0, 3.0):
        e = np.array([eta])
        probs, est = oracle.enumerate_estimates("double-cv", e, obj, 2)
        a_star = optimal_alpha_k2(*k2_regression_pair(est), weights=probs)
        print(f"{eta:8.2f}{float(bernoulli.sigmoid(e)[0]):10.4f}{a_star:12.5f}"
              f"{oracle.estimator_variance_exact('rloo', e, obj, 2):14.4g}"
              f"{oracle.estimator_variance_exact('rstar', e, obj, 2):14.4g}"
              f"{oracle.estimator_variance_exact('double-cv', e, obj, 2, a_star):14.4g}")


if __name__ == "__main__":
    main()
