"""Shared test utilities: random graph generation and the statistical
trial for the fused uniform error bound."""

from __future__ import annotations

import numpy as np

from gpcons.fusion import (BoundParams, LocalPrediction, estimate_lipschitz,
                           fuse, pointwise_bound)
from gpcons.gp import Dataset, KernelParams, fit, predict_batch
from gpcons.topology import Topology


def random_connected_topology(rng: np.random.Generator, n: int) -> Topology:
    """Random tree plus extra edges, with at least one leader link."""
    a = np.zeros((n, n))
    for v in range(1, n):
        u = rng.integers(0, v)
        a[u, v] = a[v, u] = 1.0
    for i in range(n):
        for j in range(i + 1, n):
            if a[i, j] == 0 and rng.random() < 0.25:
                a[i, j] = a[j, i] = 1.0
    b = (rng.random(n) < 0.4).astype(float)
    if b.max() == 0:
        b[rng.integers(0, n)] = 1.0
    return Topology(a, b)


def se_kernel_1d(xa: np.ndarray, xb: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * (xa[:, None] - xb[None, :]) ** 2)


def fused_bound_trial(rng: np.random.Generator, n_train: int = 30,
                      n_grid: int = 200, rho: float = 0.01,
                      delta: float = 0.05) -> bool:
    """Sample a function from the GP prior on [-2, 2], split noisy training
    data between two connected agents, and check whether the fused
    prediction error stays below the probabilistic bound on a dense grid.
    """
    noise_var = 0.01
    train1 = np.linspace(-2.0, 0.0, n_train)
    train2 = np.linspace(0.0, 2.0, n_train)
    grid = np.linspace(-2.0, 2.0, n_grid)
    pts = np.concatenate([train1, train2, grid])

    cov = se_kernel_1d(pts, pts) + 1e-10 * np.eye(pts.size)
    sample = np.linalg.cholesky(cov) @ rng.standard_normal(pts.size)
    f1 = sample[:n_train]
    f2 = sample[n_train: 2 * n_train]
    f_grid = sample[2 * n_train:]

    params = KernelParams(signal_variance=1.0, weights=np.array([1.0]),
                          noise_variance=noise_var)
    models = [
        fit(Dataset(train1[:, None], f1 + rng.normal(0, np.sqrt(noise_var), n_train)),
            params),
        fit(Dataset(train2[:, None], f2 + rng.normal(0, np.sqrt(noise_var), n_train)),
            params),
    ]

    h = grid[1] - grid[0]
    l_f = float(np.abs(np.diff(sample[2 * n_train:])).max() / h)
    l_mu = {}
    l_sigma2 = {}
    for j, model in enumerate(models):
        mean_fn = lambda q, mo=model: predict_batch(mo, q)[0]
        var_fn = lambda q, mo=model: predict_batch(mo, q)[1]
        l_mu[(j, 0)] = estimate_lipschitz(mean_fn, [-2.0], [2.0],
                                          points_per_axis=400).value
        l_sigma2[(j, 0)] = estimate_lipschitz(var_fn, [-2.0], [2.0],
                                              points_per_axis=400).value
    bp = BoundParams(rho=rho, delta=delta, r_omega=4.0, m=1, n=2,
                     l_f=l_f, l_mu=l_mu, l_sigma2=l_sigma2)

    mu = np.stack([predict_batch(mo, grid[:, None])[0] for mo in models])
    var = np.stack([predict_batch(mo, grid[:, None])[1] for mo in models])
    a_row = np.array([0.0, 1.0])  # agent 0's adjacency row
    for g in range(n_grid):
        locals_ = [LocalPrediction(agent_id=j, dim_id=0, mean=float(mu[j, g]),
                                   variance=float(var[j, g])) for j in range(2)]
        fused = fuse(locals_[0], [locals_[1]], a_row)
        bound = pointwise_bound(fused, locals_, bp)
        if abs(f_grid[g] - fused.mean) > bound:
            return False
    return True
