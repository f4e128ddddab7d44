"""Agent/leader/disturbance dynamics, the residual to be learned, and
training-data generation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .gp import Dataset

StateFn = Callable[[np.ndarray], np.ndarray]
LeaderFn = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class DynamicsSpec:
    """Follower drift f, disturbance h, optional prior model f_hat, and the
    (known) leader dynamics with its bound."""

    m: int
    f: StateFn
    h: StateFn
    leader: LeaderFn
    leader_init: np.ndarray
    f_l_bound: float
    f_hat: StateFn | None = None
    domain: tuple[np.ndarray, np.ndarray] | None = None
    name: str = "custom"


def residual(spec: DynamicsSpec, x: np.ndarray) -> np.ndarray:
    """The unknown part of the plant: f(x) - f_hat(x) + h(x)."""
    x = np.asarray(x, dtype=float)
    out = spec.f(x) + spec.h(x)
    if spec.f_hat is not None:
        out = out - spec.f_hat(x)
    return out


def builtin_paper_plant() -> DynamicsSpec:
    """The benchmark 4-agent planar system.

    f1 = 2 x2 sin(x1), f2 = x1 cos(0.2 x2^2 + x2); disturbance
    h = (sin x2, sin x1). The leader moves slowly around the unit circle:
    its velocity is 0.02*pi * (sin(0.02 pi t), cos(0.02 pi t)) starting from
    (-1, 0), so ||x_l(t)|| = 1 for all t and the whole formation stays
    inside the training domain [-2, 2]^2.
    """
    omega = 0.02 * np.pi

    def f(x):
        return np.array([2.0 * x[1] * np.sin(x[0]),
                         x[0] * np.cos(0.2 * x[1] ** 2 + x[1])])

    def h(x):
        return np.array([np.sin(x[1]), np.sin(x[0])])

    def leader(x_l, t):
        return omega * np.array([np.sin(omega * t), np.cos(omega * t)])

    lo = np.array([-2.0, -2.0])
    hi = np.array([2.0, 2.0])
    return DynamicsSpec(m=2, f=f, h=h, leader=leader,
                        leader_init=np.array([-1.0, 0.0]), f_l_bound=1.0,
                        domain=(lo, hi), name="paper_sec5")


BUILTIN_PLANTS = {"paper_sec5": builtin_paper_plant}


def _grid_points(lower: np.ndarray, upper: np.ndarray, total: int) -> np.ndarray:
    """Cell-centered uniform grid with `total` points (must be a perfect
    power of the dimension count)."""
    m = lower.shape[0]
    per_axis = round(total ** (1.0 / m))
    if per_axis**m != total:
        raise ValueError(
            f"total={total} is not a {m}-dimensional grid size "
            f"(need an integer {m}-th root)"
        )
    axes = [
        lower[i] + (np.arange(per_axis) + 0.5) * (upper[i] - lower[i]) / per_axis
        for i in range(m)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


def _quadrant_index(points: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Assign each 2-D point to one of four quadrants around the domain center.

    Agent 1 gets the lower-left quadrant, agent 2 lower-right, agent 3
    upper-left, agent 4 upper-right (lexicographic convention).
    """
    center = 0.5 * (lower + upper)
    right = points[:, 0] >= center[0]
    upper_half = points[:, 1] >= center[1]
    return right.astype(int) + 2 * upper_half.astype(int)


def generate_training_data(spec: DynamicsSpec, lower: np.ndarray, upper: np.ndarray,
                           total: int, n_agents: int, noise_variance: float,
                           seed: int, partition: str = "quadrant",
                           sampling: str = "grid") -> list[list[Dataset]]:
    """Sample the residual on the domain and split it among the agents.

    Returns one Dataset per agent per output dimension (n x m nested list).
    Outputs are residual values plus i.i.d. Gaussian noise; everything is
    deterministic given the seed.
    """
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    rng = np.random.default_rng(seed)
    if sampling == "grid":
        points = _grid_points(lower, upper, total)
    elif sampling == "random":
        points = rng.uniform(lower, upper, size=(total, lower.shape[0]))
    else:
        raise ValueError(f"unknown sampling scheme {sampling!r}")

    if partition == "quadrant":
        if spec.m != 2 or n_agents != 4:
            raise ValueError("quadrant partition requires 4 agents and a 2-D domain")
        assignment = _quadrant_index(points, lower, upper)
    elif partition == "interleaved":
        assignment = np.arange(total) % n_agents
    else:
        raise ValueError(f"unknown partition scheme {partition!r}")

    outputs = np.array([residual(spec, p) for p in points])
    if noise_variance > 0:
        outputs = outputs + rng.normal(0.0, np.sqrt(noise_variance), outputs.shape)

    datasets = []
    for i in range(n_agents):
        mask = assignment == i
        datasets.append([Dataset(points[mask], outputs[mask, k])
                         for k in range(spec.m)])
    return datasets
