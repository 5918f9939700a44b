"""Per-step training records and their CSV / JSONL serialization."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

FIELDS = ("step", "objective", "grad_variance", "alpha", "mean_sigma_eta", "wall_secs")


@dataclass
class StepRecord:
    step: int
    objective: float
    grad_variance: float
    alpha: float
    mean_sigma_eta: float
    wall_secs: float
    # cumulative training backward passes; instrumentation only, not serialized
    backward_passes: int = 0

    def row(self) -> dict:
        return {k: getattr(self, k) for k in FIELDS}


def _fmt(value) -> str:
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".17g")


def _json_num(value) -> str:
    if isinstance(value, int):
        return str(value)
    value = float(value)
    return format(value, ".17g") if math.isfinite(value) else "null"


def write_metrics(records, path, format: str = "csv") -> None:
    if format == "csv":
        with open(path, "w", newline="") as f:
            f.write(",".join(FIELDS) + "\n")
            for r in records:
                f.write(",".join(_fmt(v) for v in r.row().values()) + "\n")
    elif format == "jsonl":
        with open(path, "w") as f:
            for r in records:
                body = ", ".join(f'"{k}": {_json_num(v)}' for k, v in r.row().items())
                f.write("{" + body + "}\n")
    else:
        raise ValueError(f"unknown metrics format {format!r}")


def read_metrics(path, format: str = "csv") -> list[dict]:
    rows = []
    if format == "csv":
        with open(path, newline="") as f:
            for row in csv.DictReader(f):
                rows.append({k: int(v) if k == "step" else float(v) for k, v in row.items()})
    elif format == "jsonl":
        with open(path) as f:
            for line in f:
                row = json.loads(line)
                rows.append({k: math.nan if v is None else v for k, v in row.items()})
    else:
        raise ValueError(f"unknown metrics format {format!r}")
    return rows
