"""Toy problem, D=200, K=2: gradient variance and mean sigma(eta) per estimator."""

from _common import fraction_below, parser, save, table

from doublecv.training import ToyConfig, TrainConfig, run_training

ESTIMATORS = ("double-cv", "rloo", "disarm", "reinforce")


def main():
    args = parser(__doc__, 20_000, "results/toy_d200").parse_args()
    runs = {
        est: run_training(TrainConfig(estimator=est, k=2, steps=args.steps, seed=args.seed, lr=1e-3,
                                      probe_every=500, objective=ToyConfig(200, 0.499), record_time=False))
        for est in ESTIMATORS
    }
    save(runs, args.out)
    print("gradient variance")
    table(runs, every=4)
    print("\nmean sigma(eta)")
    table(runs, every=4, column="mean_sigma_eta")
    print(f"\ndouble-cv below rloo at {fraction_below(runs['double-cv'], runs['rloo'], 1000):.0%} "
          "of probes after step 1000")


if __name__ == "__main__":
    main()
