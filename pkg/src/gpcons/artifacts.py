"""Artifact persistence: trajectory CSVs, training-data CSVs, JSON sidecars
and run manifests. Locale-independent, 17 significant digits, exact
round-trip."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .gp import Dataset
from .sim import TrajectoryLog

FLOAT_FMT = "%.17g"


def _fmt(x: float) -> str:
    return FLOAT_FMT % x


def trajectory_header(n: int, m: int) -> list[str]:
    cols = ["t"] + [f"xl_{k + 1}" for k in range(m)]
    for i in range(1, n + 1):
        for block in ("x", "u", "e", "xi"):
            cols += [f"{block}{i}_{k + 1}" for k in range(m)]
    cols += ["V"] + [f"E_{k + 1}" for k in range(m)]
    cols += [f"dtau_{i}" for i in range(1, n + 1)]
    return cols


def write_trajectory_csv(log: TrajectoryLog, path: str | Path) -> None:
    n, m = log.n, log.m
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(trajectory_header(n, m))
        for s in range(log.steps):
            row = [log.t[s]] + list(log.leader[s])
            for i in range(n):
                row += list(log.states[s, i]) + list(log.controls[s, i])
                row += list(log.e[s, i]) + list(log.xi[s, i])
            row += [log.lyapunov[s]] + list(log.accumulated[s])
            row += list(log.dtau[s])
            writer.writerow([_fmt(v) for v in row])


def read_trajectory_csv(path: str | Path, mode: str = "unknown") -> TrajectoryLog:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = np.array([[float(v) for v in row] for row in reader])
    if rows.size == 0:
        raise ValueError(f"{path}: empty trajectory")
    m = sum(1 for c in header if c.startswith("xl_"))
    n = sum(1 for c in header if c.startswith("dtau_"))
    if header != trajectory_header(n, m):
        raise ValueError(f"{path}: unrecognized trajectory header")
    steps = rows.shape[0]
    blocks = rows[:, 1 + m: 1 + m + 4 * n * m].reshape(steps, n, 4, m)
    base = 1 + m + 4 * n * m
    return TrajectoryLog(
        mode=mode,
        t=rows[:, 0],
        leader=rows[:, 1: 1 + m],
        states=blocks[:, :, 0, :].copy(),
        controls=blocks[:, :, 1, :].copy(),
        e=blocks[:, :, 2, :].copy(),
        xi=blocks[:, :, 3, :].copy(),
        lyapunov=rows[:, base],
        accumulated=rows[:, base + 1: base + 1 + m],
        dtau=rows[:, base + 1 + m:],
    )


def write_training_csv(dataset: Dataset, path: str | Path) -> None:
    m = dataset.inputs.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x_{k + 1}" for k in range(m)] + ["y"])
        for x, y in zip(dataset.inputs, dataset.outputs):
            writer.writerow([_fmt(v) for v in x] + [_fmt(y)])


def read_training_csv(path: str | Path) -> Dataset:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = np.array([[float(v) for v in row] for row in reader])
    m = len(header) - 1
    if rows.size == 0:
        return Dataset(np.empty((0, m)), np.empty(0))
    return Dataset(rows[:, :m], rows[:, m])


def write_json(payload: dict, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def config_hash(config: ExperimentConfig) -> str:
    blob = json.dumps(config.canonical_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def write_manifest(config: ExperimentConfig, out_dir: Path,
                   artifacts: list[str], command: str) -> None:
    payload = {
        "command": command,
        "config": config.canonical_dict(),
        "config_sha256": config_hash(config),
        "sim_seed": config.sim_seed,
        "training_seed": config.training_seed,
        "versions": {"gpcons": __version__, "numpy": np.__version__},
        "artifacts": sorted(artifacts),
    }
    write_json(payload, out_dir / "manifest.json")
