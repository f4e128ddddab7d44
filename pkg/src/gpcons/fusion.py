"""Precision-weighted aggregation of neighbor GP predictions and the
probabilistic uniform error bound machinery."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, NamedTuple, Sequence

import numpy as np


@dataclass(frozen=True)
class LocalPrediction:
    """One agent's GP prediction for one output dimension at a query point."""

    agent_id: int
    dim_id: int
    mean: float
    variance: float

    def __post_init__(self):
        if not self.variance > 0:
            raise ValueError(
                f"non-positive prediction variance ({self.variance}) for agent "
                f"{self.agent_id}, dim {self.dim_id}"
            )


@dataclass(frozen=True)
class FusedPrediction:
    """Aggregated mean/precision plus the convex weights per contributing agent."""

    mean: float
    precision: float
    weights: Mapping[int, float]


def fuse(own: LocalPrediction, neighbors: Sequence[LocalPrediction],
         a_row: np.ndarray) -> FusedPrediction:
    """Combine own and neighbor predictions with inverse-variance weights.

    a_row is the agent's adjacency row; only neighbors with a_ij > 0
    contribute. Weights are a_ij * sigma_j^-2 / sigma_tilde^-2 and sum to one.
    """
    a_row = np.asarray(a_row, dtype=float)
    precision = 1.0 / own.variance
    num = own.mean / own.variance
    contrib = {own.agent_id: 1.0 / own.variance}
    for p in neighbors:
        a = a_row[p.agent_id]
        if a <= 0:
            continue
        if p.dim_id != own.dim_id:
            raise ValueError("fusing predictions of different output dimensions")
        precision += a / p.variance
        num += a * p.mean / p.variance
        contrib[p.agent_id] = contrib.get(p.agent_id, 0.0) + a / p.variance
    weights = {j: c / precision for j, c in contrib.items()}
    return FusedPrediction(mean=num / precision, precision=precision, weights=weights)


def beta(rho: float, delta: float, m: int, n: int, r_omega: float) -> float:
    """Scaling factor of the uniform bound from the hypercube covering of the domain."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if rho <= 0 or r_omega <= 0:
        raise ValueError("rho and the domain diameter must be positive")
    arg = r_omega * math.sqrt(m) / (2.0 * rho)
    if arg < 1.0:
        raise ValueError(
            f"covering bound vacuous: r_omega*sqrt(m)/(2*rho) = {arg:.4g} < 1; "
            "choose a smaller rho"
        )
    return 2.0 * m * math.log(arg) + 2.0 * math.log(n) - 2.0 * math.log(delta)


def gamma(rho: float, beta_value: float, l_f: float, l_mu: float, l_sigma2: float) -> float:
    """Grid-resolution slack: (L_f + L_mu)*rho + sqrt(beta * L_sigma2 * rho)."""
    if min(rho, l_f, l_mu, l_sigma2) < 0:
        raise ValueError("gamma arguments must be nonnegative")
    return (l_f + l_mu) * rho + math.sqrt(beta_value * l_sigma2 * rho)


@dataclass(frozen=True)
class BoundParams:
    """Inputs of the uniform error bound.

    l_mu and l_sigma2 map (agent_id, dim_id) to the Lipschitz constants of
    that agent's posterior mean and variance functions.
    """

    rho: float
    delta: float
    r_omega: float
    m: int
    n: int
    l_f: float
    l_mu: Mapping[tuple[int, int], float]
    l_sigma2: Mapping[tuple[int, int], float]

    def __post_init__(self):
        if self.rho <= 0 or self.r_omega <= 0:
            raise ValueError("rho and r_omega must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.l_f < 0 or any(v < 0 for v in self.l_mu.values()) \
                or any(v < 0 for v in self.l_sigma2.values()):
            raise ValueError("Lipschitz constants must be nonnegative")

    def beta(self) -> float:
        return beta(self.rho, self.delta, self.m, self.n, self.r_omega)

    def gamma(self, agent_id: int, dim_id: int) -> float:
        key = (agent_id, dim_id)
        return gamma(self.rho, self.beta(), self.l_f,
                     self.l_mu[key], self.l_sigma2[key])


def pointwise_bound(fused: FusedPrediction, locals_: Sequence[LocalPrediction],
                    params: BoundParams) -> float:
    """High-probability bound on |tau_k - fused mean| at one query point:
    sum_j w_j (sqrt(beta) sigma_j + gamma_j), with the fusion weights."""
    by_agent = {p.agent_id: p for p in locals_}
    sqrt_beta = math.sqrt(params.beta())
    total = 0.0
    for j, w in fused.weights.items():
        p = by_agent[j]
        total += w * (sqrt_beta * math.sqrt(p.variance) + params.gamma(j, p.dim_id))
    return total


class LipschitzEstimate(NamedTuple):
    value: float
    spacing: float


def estimate_lipschitz(fn: Callable[[np.ndarray], np.ndarray],
                       lower: np.ndarray, upper: np.ndarray,
                       resolution: float | None = None,
                       points_per_axis: int = 200) -> LipschitzEstimate:
    """Max gradient norm of a scalar field over a uniform grid.

    fn takes an (N, m) array of points and returns (N,) values. Either pass
    a target grid spacing (resolution) or a per-axis point count.
    """
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    if lower.shape != upper.shape or np.any(upper <= lower):
        raise ValueError("invalid domain bounds")
    m = lower.shape[0]
    if resolution is not None:
        if resolution <= 0:
            raise ValueError("grid resolution must be positive")
        counts = [max(2, int(np.ceil((upper[i] - lower[i]) / resolution)) + 1)
                  for i in range(m)]
    else:
        counts = [max(2, points_per_axis)] * m
    axes = [np.linspace(lower[i], upper[i], counts[i]) for i in range(m)]
    spacings = [ax[1] - ax[0] for ax in axes]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=1)
    vals = np.asarray(fn(pts), dtype=float).reshape([c for c in counts])
    if not np.all(np.isfinite(vals)):
        raise ValueError("field evaluated to non-finite values on the grid")
    grads = np.gradient(vals, *spacings) if m > 1 else [np.gradient(vals, spacings[0])]
    norm2 = sum(g**2 for g in grads)
    return LipschitzEstimate(value=float(np.sqrt(norm2.max())),
                             spacing=float(max(spacings)))
