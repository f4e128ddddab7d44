"""Consensus error computation and the three control laws."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .topology import Topology


class ControlMode(enum.Enum):
    NO_LEARNING = "none"
    INDIVIDUAL_GP = "individual"
    DISTRIBUTED_GP = "distributed"

    @property
    def uses_learning(self) -> bool:
        return self is not ControlMode.NO_LEARNING


@dataclass(frozen=True)
class ConsensusState:
    """Per-agent consensus errors xi (n, m) and tracking errors e (n, m)."""

    xi: np.ndarray
    e: np.ndarray


def consensus_error(states: np.ndarray, leader_state: np.ndarray,
                    topology: Topology) -> ConsensusState:
    """xi_i = sum_j a_ij (x_i - x_j) + b_ii (x_i - x_l), computed per agent."""
    states = np.atleast_2d(np.asarray(states, dtype=float))
    leader_state = np.atleast_1d(np.asarray(leader_state, dtype=float))
    n = topology.n
    if states.shape[0] != n or states.shape[1] != leader_state.shape[0]:
        raise ValueError("state dimensions inconsistent with the topology")
    e = states - leader_state
    a = topology.adjacency
    b = topology.leader_links
    xi = np.empty_like(e)
    for i in range(n):
        acc = b[i] * e[i]
        for j in np.flatnonzero(a[i] > 0):
            acc = acc + a[i, j] * (e[i] - e[j])
        xi[i] = acc
    return ConsensusState(xi=xi, e=e)


def control_input(mode: ControlMode, gain: float, xi_i: np.ndarray,
                  prediction: np.ndarray | None = None,
                  f_hat_value: np.ndarray | None = None) -> np.ndarray:
    """u_i = -k_i xi_i - mu_tilde_i(x_i) [- f_hat(x_i)].

    prediction is the agent's own posterior mean for INDIVIDUAL_GP and the
    fused mean for DISTRIBUTED_GP; it must be absent for NO_LEARNING.
    """
    if gain <= 0:
        raise ValueError("control gains must be strictly positive")
    xi_i = np.asarray(xi_i, dtype=float)
    u = -gain * xi_i
    if mode.uses_learning:
        if prediction is None:
            raise ValueError(f"mode {mode.value} requires a prediction")
        u = u - np.asarray(prediction, dtype=float)
    elif prediction is not None:
        raise ValueError("NO_LEARNING takes no prediction")
    if f_hat_value is not None:
        u = u - np.asarray(f_hat_value, dtype=float)
    return u


def theorem1_radius(nu: float, k_star: float, lambda_min: float) -> float:
    """Guaranteed ultimate bound sqrt(2 nu) / (k* lambda_min)."""
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    if k_star <= 0 or lambda_min <= 0:
        raise ValueError("k* and lambda_min must be positive")
    return math.sqrt(2.0 * nu) / (k_star * lambda_min)
