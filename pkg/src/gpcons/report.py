"""Numerical evaluation of the uniform error bound and the guaranteed
tracking radius for a trained experiment."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig
from .control import theorem1_radius
from .fusion import beta as beta_fn
from .fusion import gamma as gamma_fn
from .gp import GPModel, predict_batch
from .plant import DynamicsSpec, residual
from .sim import TrajectoryLog
from .topology import Topology, grounded_laplacian

TAIL_FRACTION = 0.5


@dataclass(frozen=True)
class BoundReport:
    beta: float
    probability: float
    rho: float
    delta: float
    r_omega: float
    l_f: float
    l_mu: np.ndarray          # (n, m)
    l_sigma2: np.ndarray      # (n, m)
    gamma: np.ndarray         # (n, m)
    grid_max_bound: np.ndarray  # (n, m): sup over the grid of the fused bound
    lambda_min: float
    k_star: float
    f_l_bound: float
    nu_grid: float
    radius_grid: float
    nu_trajectory_tail: float | None = None
    radius_trajectory_tail: float | None = None

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "probability": self.probability,
            "rho": self.rho,
            "delta": self.delta,
            "r_omega": self.r_omega,
            "lipschitz": {
                "l_f": self.l_f,
                "l_mu": self.l_mu.tolist(),
                "l_sigma2": self.l_sigma2.tolist(),
            },
            "gamma": self.gamma.tolist(),
            "grid_max_pointwise_bound": self.grid_max_bound.tolist(),
            "lambda_min": self.lambda_min,
            "k_star": self.k_star,
            "f_l_bound": self.f_l_bound,
            "nu": {"grid": self.nu_grid,
                   "trajectory_tail": self.nu_trajectory_tail},
            "radius": {"grid": self.radius_grid,
                       "trajectory_tail": self.radius_trajectory_tail},
        }


def _grid(lower: np.ndarray, upper: np.ndarray, per_axis: int) -> np.ndarray:
    axes = [np.linspace(lower[i], upper[i], per_axis) for i in range(lower.shape[0])]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


def compute_bound_report(config: ExperimentConfig, spec: DynamicsSpec,
                         topology: Topology, models: list[list[GPModel]],
                         log: TrajectoryLog | None = None) -> BoundReport:
    """Evaluate beta, the per-model gamma table, grid suprema of the fused
    prediction-error bound, and the guaranteed radius.

    Lipschitz constants are finite-difference estimates on a uniform grid
    over the training domain. If a trajectory log is given, the trajectory
    variant of nu uses the supremum of the measured model error over the
    tail half of the run.
    """
    lo, hi = config.domain_arrays()
    n = topology.n
    m = spec.m
    r_omega = float(np.linalg.norm(hi - lo))
    beta = beta_fn(config.rho, config.delta, m, n, r_omega)
    per_axis = config.lipschitz_grid

    pts = _grid(lo, hi, per_axis)
    grid_shape = [per_axis] * m
    spacings = [(hi[i] - lo[i]) / (per_axis - 1) for i in range(m)]

    def grad_max(values: np.ndarray) -> float:
        v = values.reshape(grid_shape)
        grads = np.gradient(v, *spacings) if m > 1 else [np.gradient(v, spacings[0])]
        return float(np.sqrt(sum(g**2 for g in grads).max()))

    tau_grid = np.array([residual(spec, p) for p in pts])  # (G, m)
    l_f = max(grad_max(tau_grid[:, k]) for k in range(m))

    mean_grid = np.empty((n, m, pts.shape[0]))
    var_grid = np.empty((n, m, pts.shape[0]))
    l_mu = np.empty((n, m))
    l_sigma2 = np.empty((n, m))
    for j in range(n):
        for k in range(m):
            mu, var = predict_batch(models[j][k], pts)
            mean_grid[j, k] = mu
            var_grid[j, k] = np.maximum(var, 1e-300)
            l_mu[j, k] = grad_max(mu)
            l_sigma2[j, k] = grad_max(var)

    gamma = np.array([[gamma_fn(config.rho, beta, l_f, l_mu[j, k], l_sigma2[j, k])
                       for k in range(m)] for j in range(n)])

    # fused bound and fused model error per agent over the grid
    a = topology.adjacency
    sqrt_beta = math.sqrt(beta)
    grid_max_bound = np.empty((n, m))
    dtau_grid = np.zeros((n, pts.shape[0]))
    for i in range(n):
        members = [j for j in range(n) if j == i or a[i, j] > 0]
        for k in range(m):
            prec = np.zeros(pts.shape[0])
            num = np.zeros(pts.shape[0])
            bound_num = np.zeros(pts.shape[0])
            for j in members:
                w_raw = (1.0 if j == i else a[i, j]) / var_grid[j, k]
                prec += w_raw
                num += w_raw * mean_grid[j, k]
                bound_num += w_raw * (sqrt_beta * np.sqrt(var_grid[j, k])
                                      + gamma[j, k])
            fused_mean = num / prec
            grid_max_bound[i, k] = float((bound_num / prec).max())
            dtau_grid[i] += (tau_grid[:, k] - fused_mean) ** 2
    dtau_grid = np.sqrt(dtau_grid)

    grounded = grounded_laplacian(topology)
    k_star = float(min(config.gains))
    fl2 = spec.f_l_bound**2
    nu_grid = float(np.sum(fl2 + dtau_grid.max(axis=1) ** 2))
    radius_grid = theorem1_radius(nu_grid, k_star, grounded.lambda_min)

    nu_tail = radius_tail = None
    if log is not None:
        tail = log.dtau[log.tail_slice(TAIL_FRACTION)]
        nu_tail = float(np.sum(fl2 + tail.max(axis=0) ** 2))
        radius_tail = theorem1_radius(nu_tail, k_star, grounded.lambda_min)

    return BoundReport(
        beta=beta, probability=(1.0 - config.delta) ** m,
        rho=config.rho, delta=config.delta, r_omega=r_omega,
        l_f=l_f, l_mu=l_mu, l_sigma2=l_sigma2, gamma=gamma,
        grid_max_bound=grid_max_bound,
        lambda_min=grounded.lambda_min, k_star=k_star,
        f_l_bound=spec.f_l_bound,
        nu_grid=nu_grid, radius_grid=radius_grid,
        nu_trajectory_tail=nu_tail, radius_trajectory_tail=radius_tail,
    )
