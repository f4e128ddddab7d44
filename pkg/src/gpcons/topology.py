"""Communication graph among followers and its grounded Laplacian."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class TopologyError(ValueError):
    """Raised when a communication graph violates the structural assumptions."""


def check_assumption3(adjacency: np.ndarray, leader_links: np.ndarray) -> tuple[bool, str]:
    """Check that the follower graph is connected and the leader is attached.

    Returns (ok, diagnostic). Never raises; intended for pre-validation of
    raw arrays before a Topology is built.
    """
    adjacency = np.asarray(adjacency, dtype=float)
    leader_links = np.asarray(leader_links, dtype=float)
    n = adjacency.shape[0]
    if n == 0:
        return False, "empty graph"
    # breadth-first traversal from node 0
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        i = stack.pop()
        for j in np.flatnonzero(adjacency[i] > 0):
            if not seen[j]:
                seen[j] = True
                stack.append(int(j))
    if not seen.all():
        missing = np.flatnonzero(~seen)
        return False, f"follower graph not connected (unreachable agents: {missing.tolist()})"
    if leader_links.max(initial=0.0) < 1:
        return False, "no follower is linked to the leader"
    return True, "ok"


@dataclass(frozen=True)
class Topology:
    """Undirected follower graph plus leader attachment vector.

    adjacency is n x n with entries in {0, 1} (arbitrary nonnegative weights
    if allow_weighted), symmetric, zero diagonal. leader_links is the
    diagonal of B.
    """

    adjacency: np.ndarray
    leader_links: np.ndarray
    allow_weighted: bool = False

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=float)
        b = np.asarray(self.leader_links, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise TopologyError("adjacency must be a square matrix")
        if b.shape != (a.shape[0],):
            raise TopologyError("leader_links length must equal the agent count")
        if not np.array_equal(a, a.T):
            raise TopologyError("adjacency not symmetric")
        if np.any(np.diag(a) != 0):
            raise TopologyError("adjacency has self-loops")
        if not self.allow_weighted:
            if not np.isin(a, (0.0, 1.0)).all():
                raise TopologyError("adjacency entries must be 0 or 1")
            if not np.isin(b, (0.0, 1.0)).all():
                raise TopologyError("leader_links entries must be 0 or 1")
        elif np.any(a < 0) or np.any(b < 0):
            raise TopologyError("edge weights must be nonnegative")
        ok, diag = check_assumption3(a, b)
        if not ok:
            raise TopologyError(diag)
        object.__setattr__(self, "adjacency", a)
        object.__setattr__(self, "leader_links", b)
        self.adjacency.setflags(write=False)
        self.leader_links.setflags(write=False)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @classmethod
    def from_edges(cls, n: int, edges, leader_agents, allow_weighted: bool = False) -> "Topology":
        """Build from a 1-based edge list and a 1-based list of leader-linked agents."""
        a = np.zeros((n, n))
        for i, j in edges:
            if not (1 <= i <= n and 1 <= j <= n):
                raise TopologyError(f"edge ({i},{j}) references an unknown agent")
            if i == j:
                raise TopologyError(f"edge ({i},{j}) is a self-loop")
            a[i - 1, j - 1] = a[j - 1, i - 1] = 1.0
        b = np.zeros(n)
        for i in leader_agents:
            if not 1 <= i <= n:
                raise TopologyError(f"leader link {i} references an unknown agent")
            b[i - 1] = 1.0
        return cls(a, b, allow_weighted=allow_weighted)


@dataclass(frozen=True)
class GroundedLaplacian:
    """L + B together with its extreme eigenvalues."""

    matrix: np.ndarray
    lambda_min: float
    lambda_max: float
    eigenvalues: np.ndarray = field(repr=False, default=None)


def laplacian(topology: Topology) -> np.ndarray:
    """Follower Laplacian D - A (symmetric, zero row sums)."""
    a = topology.adjacency
    return np.diag(a.sum(axis=1)) - a


def grounded_laplacian(topology: Topology) -> GroundedLaplacian:
    """L + diag(b) with eigenvalues; raises if not positive definite."""
    m = laplacian(topology) + np.diag(topology.leader_links)
    eig = np.linalg.eigvalsh(m)
    if eig[0] <= 0:
        raise TopologyError(
            f"grounded Laplacian not positive definite (lambda_min={eig[0]:.3e}); "
            "the graph violates the connectivity/leader-link assumption"
        )
    return GroundedLaplacian(matrix=m, lambda_min=float(eig[0]),
                             lambda_max=float(eig[-1]), eigenvalues=eig)
