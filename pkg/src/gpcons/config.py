"""Experiment configuration: TOML schema, strict validation, builders."""

from __future__ import annotations

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .control import ControlMode
from .gp import Dataset, GPModel, KernelParams, fit
from .plant import BUILTIN_PLANTS, DynamicsSpec, generate_training_data
from .sim import SimConfig
from .topology import Topology


class ConfigError(ValueError):
    """Raised on malformed configuration documents."""


_SCHEMA = {
    "plant": {"name"},
    "topology": {"n", "edges", "leader_links", "adjacency", "weighted"},
    "training": {"total", "domain", "partition", "sampling", "noise_variance", "seed"},
    "kernel": {"signal_variance", "weights", "noise_variance"},
    "control": {"mode", "gains"},
    "sim": {"dt", "horizon", "init_range", "seed", "leader_init"},
    "bounds": {"delta", "rho", "lipschitz_grid"},
    "output": {"directory"},
}

_MODE_NAMES = {m.value: m for m in ControlMode}


@dataclass(frozen=True)
class ExperimentConfig:
    plant_name: str = "paper_sec5"
    topology_n: int = 4
    topology_edges: tuple = ((1, 3), (2, 3), (2, 4))
    topology_leader_links: tuple = (1, 2)
    topology_adjacency: tuple | None = None
    topology_weighted: bool = False
    training_total: int = 400
    training_domain: tuple = ((-2.0, 2.0), (-2.0, 2.0))
    training_partition: str = "quadrant"
    training_sampling: str = "grid"
    training_noise_variance: float = 0.01
    training_seed: int = 0
    kernel_signal_variance: float = 1.0
    kernel_weights: tuple = (1.0, 1.0)
    kernel_noise_variance: float = 0.01
    mode: str = "distributed"
    gains: tuple = (2.0, 2.0, 2.0, 2.0)
    dt: float = 0.01
    horizon: float = 100.0
    init_range: tuple = (-2.0, 2.0)
    sim_seed: int = 1
    leader_init: tuple | None = None
    delta: float = 0.05
    rho: float = 0.1
    lipschitz_grid: int = 200
    output_directory: str | None = None

    # ---- construction -------------------------------------------------

    @classmethod
    def from_toml(cls, path: str | Path) -> "ExperimentConfig":
        try:
            with open(path, "rb") as fh:
                doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config parse error: {exc}") from None
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        return cls.from_dict(doc)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        for section, content in doc.items():
            if section not in _SCHEMA:
                raise ConfigError(f"unknown config section [{section}]")
            if not isinstance(content, dict):
                raise ConfigError(f"[{section}] must be a table")
            for key in content:
                if key not in _SCHEMA[section]:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")

        def get(section, key, default):
            return doc.get(section, {}).get(key, default)

        def tup(v):
            if v is None:
                return None
            return tuple(tuple(e) if isinstance(e, (list, tuple)) else e for e in v)

        d = cls()  # defaults
        cfg = cls(
            plant_name=get("plant", "name", d.plant_name),
            topology_n=get("topology", "n", d.topology_n),
            topology_edges=tup(get("topology", "edges", d.topology_edges)),
            topology_leader_links=tuple(get("topology", "leader_links",
                                            d.topology_leader_links)),
            topology_adjacency=tup(get("topology", "adjacency", None)),
            topology_weighted=get("topology", "weighted", False),
            training_total=get("training", "total", d.training_total),
            training_domain=tup(get("training", "domain", d.training_domain)),
            training_partition=get("training", "partition", d.training_partition),
            training_sampling=get("training", "sampling", d.training_sampling),
            training_noise_variance=get("training", "noise_variance",
                                        d.training_noise_variance),
            training_seed=get("training", "seed", d.training_seed),
            kernel_signal_variance=get("kernel", "signal_variance",
                                       d.kernel_signal_variance),
            kernel_weights=tuple(get("kernel", "weights", d.kernel_weights)),
            kernel_noise_variance=get("kernel", "noise_variance",
                                      d.kernel_noise_variance),
            mode=get("control", "mode", d.mode),
            gains=tuple(np.atleast_1d(get("control", "gains", d.gains)).tolist()),
            dt=get("sim", "dt", d.dt),
            horizon=get("sim", "horizon", d.horizon),
            init_range=tuple(get("sim", "init_range", d.init_range)),
            sim_seed=get("sim", "seed", d.sim_seed),
            leader_init=tup(get("sim", "leader_init", None)),
            delta=get("bounds", "delta", d.delta),
            rho=get("bounds", "rho", d.rho),
            lipschitz_grid=get("bounds", "lipschitz_grid", d.lipschitz_grid),
            output_directory=get("output", "directory", None),
        )
        cfg.validate()
        return cfg

    def validate(self):
        if self.plant_name not in BUILTIN_PLANTS:
            raise ConfigError(f"unknown plant {self.plant_name!r} "
                              f"(available: {sorted(BUILTIN_PLANTS)})")
        if self.mode not in _MODE_NAMES:
            raise ConfigError(f"unknown mode {self.mode!r} "
                              f"(available: {sorted(_MODE_NAMES)})")
        if len(self.gains) not in (1, self.topology_n):
            raise ConfigError("gain count must be 1 or match the agent count")
        if any(k <= 0 for k in self.gains):
            raise ConfigError("control gains must be strictly positive")
        if not 0 < self.delta < 1:
            raise ConfigError("bounds.delta must lie in (0, 1)")
        if self.rho <= 0:
            raise ConfigError("bounds.rho must be positive")
        if self.dt <= 0 or self.horizon < self.dt:
            raise ConfigError("need sim.dt > 0 and sim.horizon >= sim.dt")
        for lo, hi in self.training_domain:
            if hi <= lo:
                raise ConfigError("training.domain bounds must satisfy lo < hi")
        if self.training_noise_variance < 0:
            raise ConfigError("training.noise_variance must be nonnegative")
        self.build_topology()  # raises TopologyError on bad graphs

    # ---- builders -----------------------------------------------------

    def build_topology(self) -> Topology:
        if self.topology_adjacency is not None:
            a = np.array(self.topology_adjacency, dtype=float)
            b = np.zeros(self.topology_n)
            for i in self.topology_leader_links:
                b[i - 1] = 1.0
            return Topology(a, b, allow_weighted=self.topology_weighted)
        return Topology.from_edges(self.topology_n, self.topology_edges,
                                   self.topology_leader_links,
                                   allow_weighted=self.topology_weighted)

    def build_plant(self) -> DynamicsSpec:
        return BUILTIN_PLANTS[self.plant_name]()

    def domain_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        dom = np.array(self.training_domain, dtype=float)
        return dom[:, 0], dom[:, 1]

    def kernel_params(self) -> KernelParams:
        return KernelParams(signal_variance=self.kernel_signal_variance,
                            weights=np.array(self.kernel_weights),
                            noise_variance=self.kernel_noise_variance)

    def training_datasets(self, spec: DynamicsSpec) -> list[list[Dataset]]:
        lo, hi = self.domain_arrays()
        return generate_training_data(
            spec, lo, hi, total=self.training_total, n_agents=self.topology_n,
            noise_variance=self.training_noise_variance, seed=self.training_seed,
            partition=self.training_partition, sampling=self.training_sampling)

    def train_models(self, spec: DynamicsSpec,
                     datasets: list[list[Dataset]] | None = None) -> list[list[GPModel]]:
        params = self.kernel_params()
        if datasets is None:
            datasets = self.training_datasets(spec)
        return [[fit(ds, params) for ds in row] for row in datasets]

    def sim_config(self, mode: str | None = None,
                   seed: int | None = None) -> SimConfig:
        return SimConfig(
            mode=_MODE_NAMES[mode or self.mode],
            gains=np.array(self.gains, dtype=float),
            dt=self.dt, horizon=self.horizon,
            init_range=tuple(self.init_range),
            seed=self.sim_seed if seed is None else seed,
            delta=self.delta, rho=self.rho,
            leader_init=None if self.leader_init is None
            else np.array(self.leader_init, dtype=float),
        )

    def canonical_dict(self) -> dict:
        """Stable nested representation used for hashing and manifests."""
        return {
            "plant": {"name": self.plant_name},
            "topology": {
                "n": self.topology_n,
                "edges": [list(e) for e in (self.topology_edges or ())],
                "leader_links": list(self.topology_leader_links),
                "adjacency": None if self.topology_adjacency is None
                else [list(r) for r in self.topology_adjacency],
                "weighted": self.topology_weighted,
            },
            "training": {
                "total": self.training_total,
                "domain": [list(d) for d in self.training_domain],
                "partition": self.training_partition,
                "sampling": self.training_sampling,
                "noise_variance": self.training_noise_variance,
                "seed": self.training_seed,
            },
            "kernel": {
                "signal_variance": self.kernel_signal_variance,
                "weights": list(self.kernel_weights),
                "noise_variance": self.kernel_noise_variance,
            },
            "control": {"mode": self.mode, "gains": list(self.gains)},
            "sim": {
                "dt": self.dt, "horizon": self.horizon,
                "init_range": list(self.init_range), "seed": self.sim_seed,
                "leader_init": None if self.leader_init is None
                else list(self.leader_init),
            },
            "bounds": {"delta": self.delta, "rho": self.rho,
                       "lipschitz_grid": self.lipschitz_grid},
        }

    def replace(self, **kwargs) -> "ExperimentConfig":
        from dataclasses import replace as _replace
        return _replace(self, **kwargs)
