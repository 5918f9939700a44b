"""Shared helpers for the experiment scripts."""

import argparse
from pathlib import Path

import numpy as np

from doublecv.metrics import write_metrics


def parser(doc: str, steps: int, out: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=doc)
    p.add_argument("--steps", type=int, default=steps)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=out, help="directory for per-estimator CSV files")
    return p


def save(runs: dict, out: str):
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    for name, records in runs.items():
        write_metrics(records, path / f"{name}.csv")


def table(runs: dict, every: int = 1, column: str = "grad_variance"):
    names = list(runs)
    print("step".rjust(8) + "".join(n.rjust(16) for n in names))
    steps = [r.step for r in runs[names[0]]]
    for i in range(0, len(steps), every):
        print(str(steps[i]).rjust(8) + "".join(f"{getattr(runs[n][i], column):16.4g}" for n in names))


def fraction_below(a, b, after: int = 0) -> float:
    keep = [i for i, r in enumerate(a) if r.step > after]
    if not keep:
        return float("nan")
    return float(np.mean([a[i].grad_variance <= b[i].grad_variance for i in keep]))
