"""Fixed-step closed-loop simulation with Lyapunov and containment monitors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .control import ControlMode, consensus_error, control_input
from .fusion import LocalPrediction, fuse
from .gp import GPModel, predict_batch
from .plant import DynamicsSpec, residual
from .topology import GroundedLaplacian, Topology, grounded_laplacian

DIVERGENCE_LIMIT = 1e6


class SimulationDiverged(RuntimeError):
    def __init__(self, message: str, partial_log: "TrajectoryLog"):
        super().__init__(message)
        self.partial_log = partial_log


@dataclass(frozen=True)
class SimConfig:
    """Integration and control settings for one run."""

    mode: ControlMode
    gains: np.ndarray
    dt: float = 0.01
    horizon: float = 100.0
    init_range: tuple[float, float] = (-2.0, 2.0)
    seed: int = 1
    delta: float = 0.05
    rho: float = 0.1
    leader_init: np.ndarray | None = None  # falls back to the plant's default

    def __post_init__(self):
        if self.dt <= 0 or self.horizon < self.dt:
            raise ValueError("need dt > 0 and horizon >= dt")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        g = np.atleast_1d(np.asarray(self.gains, dtype=float))
        if np.any(g <= 0):
            raise ValueError("control gains must be strictly positive")
        object.__setattr__(self, "gains", g)


@dataclass
class TrajectoryLog:
    """Uniform-grid time series of one closed-loop run."""

    mode: str
    t: np.ndarray
    leader: np.ndarray      # (S, m)
    states: np.ndarray      # (S, n, m)
    controls: np.ndarray    # (S, n, m)
    e: np.ndarray           # (S, n, m)
    xi: np.ndarray          # (S, n, m)
    lyapunov: np.ndarray    # (S,)
    accumulated: np.ndarray  # (S, m): sum_i |x_ij - x_lj|
    dtau: np.ndarray        # (S, n): ||tau(x_i) - mu_tilde_i||
    steps: int = field(init=False)

    def __post_init__(self):
        self.steps = len(self.t)

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def m(self) -> int:
        return self.states.shape[2]

    def tail_slice(self, fraction: float = 0.5) -> slice:
        return slice(int((1.0 - fraction) * self.steps), self.steps)


def rk4_step(field_fn, state: np.ndarray, t: float, dt: float) -> np.ndarray:
    """One classical Runge-Kutta step of the flat state vector."""
    k1 = field_fn(state, t)
    k2 = field_fn(state + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = field_fn(state + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = field_fn(state + dt * k3, t + dt)
    out = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise SimulationDiverged(f"non-finite state after step at t={t:.4f}", None)
    return out


def lyapunov(e: np.ndarray, grounded: GroundedLaplacian) -> float:
    """V = 1/2 e^T (L_tilde kron I_m) e for stacked or (n, m) errors."""
    lt = grounded.matrix
    e = np.asarray(e, dtype=float)
    if e.ndim == 1:
        e = e.reshape(lt.shape[0], -1)
    return 0.5 * float(np.einsum("im,ij,jm->", e, lt, e))


def _predictions(mode: ControlMode, states: np.ndarray, topology: Topology,
                 models: list[list[GPModel]]):
    """Per-agent prediction used by the controller, plus mu_tilde per agent.

    Batches all queries against each agent's models: under distributed
    fusion, model j is evaluated at the states of j and its neighbors.
    """
    n, m = states.shape
    a = topology.adjacency
    mu_tilde = np.zeros((n, m))
    if mode is ControlMode.INDIVIDUAL_GP:
        for i in range(n):
            for k in range(m):
                mu, _ = predict_batch(models[i][k], states[i:i + 1])
                mu_tilde[i, k] = mu[0]
        return mu_tilde
    # distributed: collect local predictions, then precision-weighted fusion
    local = {}
    for j in range(n):
        queriers = [i for i in range(n) if i == j or a[i, j] > 0]
        batch = states[queriers]
        for k in range(m):
            mu, var = predict_batch(models[j][k], batch)
            for idx, i in enumerate(queriers):
                local[(i, j, k)] = LocalPrediction(agent_id=j, dim_id=k,
                                                   mean=float(mu[idx]),
                                                   variance=float(var[idx]))
    for i in range(n):
        for k in range(m):
            own = local[(i, i, k)]
            neighbors = [local[(i, j, k)] for j in range(n)
                         if j != i and a[i, j] > 0]
            mu_tilde[i, k] = fuse(own, neighbors, a[i]).mean
    return mu_tilde


def run(config: SimConfig, spec: DynamicsSpec, topology: Topology,
        models: list[list[GPModel]] | None = None) -> TrajectoryLog:
    """Integrate the coupled leader-follower system under the chosen mode.

    The control input is recomputed once per step from a fresh round of
    prediction exchange and held constant over the step (zero-order hold).
    Deterministic given (config, seed).
    """
    n = topology.n
    m = spec.m
    if config.mode.uses_learning:
        if models is None:
            raise ValueError(f"mode {config.mode.value} requires trained models")
        if len(models) != n or any(len(row) != m for row in models):
            raise ValueError("need one model per agent per output dimension")
    gains = config.gains
    if gains.shape == (1,):
        gains = np.full(n, gains[0])
    if gains.shape != (n,):
        raise ValueError("gain count must match the agent count")

    grounded = grounded_laplacian(topology)
    rng = np.random.default_rng(config.seed)
    lo, hi = config.init_range
    x = rng.uniform(lo, hi, size=(n, m))
    if config.leader_init is not None:
        xl = np.asarray(config.leader_init, dtype=float).copy()
    else:
        xl = np.asarray(spec.leader_init, dtype=float).copy()

    nsteps = int(round(config.horizon / config.dt))
    shape = (nsteps + 1, n, m)
    log = TrajectoryLog(
        mode=config.mode.value,
        t=np.arange(nsteps + 1) * config.dt,
        leader=np.zeros((nsteps + 1, m)),
        states=np.zeros(shape), controls=np.zeros(shape),
        e=np.zeros(shape), xi=np.zeros(shape),
        lyapunov=np.zeros(nsteps + 1),
        accumulated=np.zeros((nsteps + 1, m)),
        dtau=np.zeros((nsteps + 1, n)),
    )

    for s in range(nsteps + 1):
        t = s * config.dt
        if config.mode.uses_learning:
            mu_tilde = _predictions(config.mode, x, topology, models)
        else:
            mu_tilde = np.zeros((n, m))
        cons = consensus_error(x, xl, topology)
        u = np.empty((n, m))
        for i in range(n):
            pred = mu_tilde[i] if config.mode.uses_learning else None
            f_hat_val = spec.f_hat(x[i]) if spec.f_hat is not None else None
            u[i] = control_input(config.mode, gains[i], cons.xi[i], pred, f_hat_val)

        log.leader[s] = xl
        log.states[s] = x
        log.controls[s] = u
        log.e[s] = cons.e
        log.xi[s] = cons.xi
        log.lyapunov[s] = lyapunov(cons.e, grounded)
        log.accumulated[s] = np.abs(cons.e).sum(axis=0)
        for i in range(n):
            log.dtau[s, i] = np.linalg.norm(residual(spec, x[i]) - mu_tilde[i])
        if s == nsteps:
            break

        def field_fn(flat, tt):
            xs = flat[: n * m].reshape(n, m)
            dx = np.empty((n, m))
            for i in range(n):
                dx[i] = spec.f(xs[i]) + spec.h(xs[i]) + u[i]
            return np.concatenate([dx.ravel(), spec.leader(flat[n * m:], tt)])

        flat = np.concatenate([x.ravel(), xl])
        try:
            flat = rk4_step(field_fn, flat, t, config.dt)
        except SimulationDiverged as exc:
            raise SimulationDiverged(str(exc), _truncate(log, s + 1)) from None
        if np.abs(flat).max() > DIVERGENCE_LIMIT:
            raise SimulationDiverged(
                f"state magnitude exceeded {DIVERGENCE_LIMIT:g} at t={t + config.dt:.4f}",
                _truncate(log, s + 1))
        x = flat[: n * m].reshape(n, m)
        xl = flat[n * m:]
    return log


def _truncate(log: TrajectoryLog, steps: int) -> TrajectoryLog:
    return TrajectoryLog(
        mode=log.mode, t=log.t[:steps], leader=log.leader[:steps],
        states=log.states[:steps], controls=log.controls[:steps],
        e=log.e[:steps], xi=log.xi[:steps], lyapunov=log.lyapunov[:steps],
        accumulated=log.accumulated[:steps], dtau=log.dtau[:steps])


@dataclass(frozen=True)
class ContainmentReport:
    radius: float
    contained: bool
    entry_time: float | None

    def __str__(self):
        if self.contained:
            return f"||e|| <= {self.radius:.4g} from t={self.entry_time:.4g} onward"
        return f"not contained within radius {self.radius:.4g}"


def radius_monitor(log: TrajectoryLog, radius: float) -> ContainmentReport:
    """First time after which the stacked tracking error stays within the ball."""
    norms = np.linalg.norm(log.e.reshape(log.steps, -1), axis=1)
    inside = norms <= radius
    if not inside[-1]:
        return ContainmentReport(radius=radius, contained=False, entry_time=None)
    # last index where the trajectory was outside the ball
    outside_idx = np.flatnonzero(~inside)
    entry = 0 if outside_idx.size == 0 else int(outside_idx[-1]) + 1
    return ContainmentReport(radius=radius, contained=True,
                             entry_time=float(log.t[entry]))
