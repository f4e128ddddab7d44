"""Command line entry point: simulate / compare / bound-report / gen-data."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .artifacts import (write_json, write_manifest, write_trajectory_csv,
                        write_training_csv)
from .config import ConfigError, ExperimentConfig
from .report import TAIL_FRACTION, compute_bound_report
from .sim import SimulationDiverged, run
from .topology import TopologyError

log = logging.getLogger("gpcons")

MODES = ("none", "individual", "distributed")


def _load_config(args) -> ExperimentConfig:
    if args.config is not None:
        cfg = ExperimentConfig.from_toml(args.config)
    else:
        cfg = ExperimentConfig()
    if args.seed is not None:
        cfg = cfg.replace(sim_seed=args.seed)
    return cfg


def _out_dir(args, cfg: ExperimentConfig) -> Path:
    target = args.out or cfg.output_directory or os.environ.get("GPCONS_OUT") or "out"
    path = Path(target)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _prepare(cfg: ExperimentConfig):
    spec = cfg.build_plant()
    topo = cfg.build_topology()
    datasets = cfg.training_datasets(spec)
    models = cfg.train_models(spec, datasets)
    return spec, topo, datasets, models


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    spec, topo, _, models = _prepare(cfg)
    log.info("running mode=%s for T=%g at dt=%g", cfg.mode, cfg.horizon, cfg.dt)
    sim_cfg = cfg.sim_config()
    traj = run(sim_cfg, spec, topo,
               models if sim_cfg.mode.uses_learning else None)
    csv_name = f"trajectory_{cfg.mode}.csv"
    write_trajectory_csv(traj, out / csv_name)
    report = compute_bound_report(cfg, spec, topo, models, log=traj)
    write_json(report.to_dict(), out / "bound_report.json")
    write_manifest(cfg, out, [csv_name, "bound_report.json"], "simulate")
    log.info("wrote %s", out / csv_name)
    return 0


def cmd_compare(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    spec, topo, _, models = _prepare(cfg)
    tail_mean = {}
    artifacts = []
    for mode in MODES:
        log.info("running mode=%s", mode)
        sim_cfg = cfg.sim_config(mode=mode)
        traj = run(sim_cfg, spec, topo,
                   models if sim_cfg.mode.uses_learning else None)
        name = f"trajectory_{mode}.csv"
        write_trajectory_csv(traj, out / name)
        artifacts.append(name)
        tail = traj.accumulated[traj.tail_slice(TAIL_FRACTION)]
        tail_mean[mode] = tail.mean(axis=0).tolist()
    m = len(tail_mean["none"])
    ordering = [tail_mean["distributed"][k] < tail_mean["individual"][k]
                < tail_mean["none"][k] for k in range(m)]
    summary = {
        "tail_fraction": TAIL_FRACTION,
        "tail_mean": tail_mean,
        "ratio_distributed_to_none": [
            tail_mean["distributed"][k] / tail_mean["none"][k] for k in range(m)],
        "ordering_ok_per_dim": ordering,
        "ordering_ok": all(ordering),
    }
    write_json(summary, out / "summary.json")
    artifacts.append("summary.json")
    write_manifest(cfg, out, artifacts, "compare")
    log.info("tail means: %s", tail_mean)
    return 0


def cmd_bound_report(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    spec, topo, _, models = _prepare(cfg)
    sim_cfg = cfg.sim_config(mode="distributed")
    traj = run(sim_cfg, spec, topo, models)
    report = compute_bound_report(cfg, spec, topo, models, log=traj)
    write_json(report.to_dict(), out / "bound_report.json")
    write_manifest(cfg, out, ["bound_report.json"], "bound-report")
    log.info("beta=%.4f radius(tail)=%.4f", report.beta,
             report.radius_trajectory_tail)
    return 0


def cmd_gen_data(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    spec = cfg.build_plant()
    cfg.build_topology()
    datasets = cfg.training_datasets(spec)
    artifacts = []
    for i, row in enumerate(datasets, start=1):
        for k, ds in enumerate(row, start=1):
            name = f"training_agent{i}_dim{k}.csv"
            write_training_csv(ds, out / name)
            artifacts.append(name)
    write_manifest(cfg, out, artifacts, "gen-data")
    log.info("wrote %d training files to %s", len(artifacts), out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpcons",
        description="Leader-follower consensus with distributed GP learning")
    sub = parser.add_subparsers(dest="command", required=True)
    handlers = {
        "simulate": cmd_simulate,
        "compare": cmd_compare,
        "bound-report": cmd_bound_report,
        "gen-data": cmd_gen_data,
    }
    for name, fn in handlers.items():
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH", default=None,
                       help="TOML config file (defaults to the builtin benchmark)")
        p.add_argument("--out", metavar="DIR", default=None,
                       help="output directory (default: $GPCONS_OUT or ./out)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the simulation seed")
        p.add_argument("--quiet", action="store_true")
        p.set_defaults(handler=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(message)s")
    try:
        return args.handler(args)
    except (ConfigError, TopologyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SimulationDiverged as exc:
        print(f"error: simulation diverged: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
