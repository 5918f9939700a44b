"""Small binary-latent VAE on synthetic 8x8 bars (or an IDX file) for a handful of estimators."""

import numpy as np
from _common import fraction_below, parser, save, table

from doublecv.training import TrainConfig, VaeConfig, run_training


def main():
    p = parser(__doc__, 5000, "results/desk_vae")
    p.add_argument("--dataset", default="synthetic")
    p.add_argument("--likelihood", choices=("bernoulli", "gaussian"), default="bernoulli")
    p.add_argument("--latent", type=int, default=16)
    p.add_argument("--hidden", type=int, default=32)
    p.add_argument("--estimators", default="double-cv,rloo,disarm")
    args = p.parse_args()
    lr = 1e-3 if args.likelihood == "bernoulli" else 1e-4
    vae = VaeConfig(dataset=args.dataset, likelihood=args.likelihood, latent=args.latent, hidden=args.hidden,
                    batch=50, probe_batch=25)
    runs = {
        est: run_training(TrainConfig(estimator=est, k=2, steps=args.steps, seed=args.seed, lr=lr, theta_lr=lr,
                                      objective=vae, record_time=False))
        for est in args.estimators.split(",")
    }
    save(runs, args.out)
    print("minibatch ELBO (mean over each 100-step interval)")
    table(runs, every=5, column="objective")
    print("\ngradient variance")
    table(runs, every=5)
    names = list(runs)
    for other in names[1:]:
        print(f"{names[0]} <= {other} at {fraction_below(runs[names[0]], runs[other]):.0%} of probes")
    print("backward passes:", {n: r[-1].backward_passes for n, r in runs.items()})
    print("final 500-step ELBO:", {n: round(float(np.mean([x.objective for x in r[-5:]])), 3)
                                   for n, r in runs.items()})


if __name__ == "__main__":
    main()
