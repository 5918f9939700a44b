"""Toy problem, D=10: the double control variate against its two halves."""

from _common import parser, save, table

from doublecv.training import ToyConfig, TrainConfig, run_training

ESTIMATORS = ("double-cv", "half-bxk", "half-bxj", "rloo", "rstar")


def main():
    args = parser(__doc__, 10_000, "results/half_estimators").parse_args()
    runs = {
        est: run_training(TrainConfig(estimator=est, k=2, steps=args.steps, seed=args.seed,
                                      probe_every=250, objective=ToyConfig(10, 0.499), record_time=False))
        for est in ESTIMATORS
    }
    save(runs, args.out)
    print("gradient variance")
    table(runs, every=4)
    print("\nalpha")
    table({k: v for k, v in runs.items() if k.startswith(("double", "half"))}, every=4, column="alpha")


if __name__ == "__main__":
    main()
