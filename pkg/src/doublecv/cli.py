"""Command line entry point: ``doublecv {toy,vae,check}``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import estimators
from .metrics import write_metrics
from .training import ToyConfig, TrainConfig, VaeConfig, run_training

log = logging.getLogger("doublecv")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--estimator", choices=estimators.NAMES, default="double-cv")
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--alpha-lr", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--optimizer", choices=("adam", "sgd"), default="adam")
    p.add_argument("--probe-every", type=int, default=100)
    p.add_argument("--probe-reps", type=int, default=100)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--timing", action="store_true",
                   help="record wall-clock seconds (otherwise 0, keeping output byte-identical across runs)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="doublecv", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    toy = sub.add_parser("toy", help="toy quadratic over binary latents")
    toy.add_argument("--dim", type=int, default=200)
    toy.add_argument("--p0", type=float, default=0.499)
    toy.add_argument("--lr", type=float, default=1e-3)
    _common(toy)

    vae = sub.add_parser("vae", help="binary-latent VAE")
    vae.add_argument("--dataset", default="synthetic", help="'synthetic' or 'idx:PATH'")
    vae.add_argument("--likelihood", choices=("bernoulli", "gaussian"), default="bernoulli")
    vae.add_argument("--latent", type=int, default=200)
    vae.add_argument("--hidden", type=int, default=200)
    vae.add_argument("--batch", type=int, default=50)
    vae.add_argument("--lr", type=float, default=None,
                     help="encoder and decoder learning rate (default 1e-3 bernoulli, 1e-4 gaussian)")
    _common(vae)

    sub.add_parser("check", help="run the exhaustive-enumeration gate suite")
    return parser


def _config(args) -> TrainConfig:
    common = dict(estimator=args.estimator, k=args.k, steps=args.steps, seed=args.seed,
                  alpha_lr=args.alpha_lr, optimizer=args.optimizer, probe_every=args.probe_every,
                  probe_reps=args.probe_reps, record_time=args.timing)
    if args.command == "toy":
        return TrainConfig(lr=args.lr, objective=ToyConfig(args.dim, args.p0), **common)
    lr = args.lr if args.lr is not None else (1e-3 if args.likelihood == "bernoulli" else 1e-4)
    vc = VaeConfig(dataset=args.dataset, likelihood=args.likelihood, latent=args.latent,
                   hidden=args.hidden, batch=args.batch)
    return TrainConfig(lr=lr, theta_lr=lr, objective=vc, **common)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "check":
        from .gates import run_all

        results = run_all()
        for r in results:
            print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
        return 0 if all(r.passed for r in results) else 1
    try:
        config = _config(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    log.info("running %s", config)
    records = run_training(config)
    write_metrics(records, args.out, args.format)
    log.info("wrote %d records to %s", len(records), args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
