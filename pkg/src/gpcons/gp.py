"""Exact GP regression with a squared-exponential kernel.

One scalar GP per agent per output dimension. Training happens once, before
the simulation starts; models are immutable afterwards and predictions are
pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GPFitError(RuntimeError):
    """Raised when the Gram matrix cannot be factorized even with jitter."""


@dataclass(frozen=True)
class KernelParams:
    """Squared-exponential kernel hyperparameters.

    signal_variance : prior variance at zero distance
    weights         : per-input-dimension inverse squared length scales
    noise_variance  : observation noise variance added to the Gram diagonal
    """

    signal_variance: float
    weights: np.ndarray
    noise_variance: float

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        object.__setattr__(self, "weights", w)
        vals = np.concatenate(([self.signal_variance, self.noise_variance], w))
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
            raise ValueError("kernel hyperparameters must be finite and strictly positive")

    @property
    def input_dim(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class Dataset:
    """Training inputs (M, m) and scalar outputs (M,)."""

    inputs: np.ndarray
    outputs: np.ndarray

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        y = np.atleast_1d(np.asarray(self.outputs, dtype=float))
        if x.shape[0] != y.shape[0]:
            raise ValueError("inputs and outputs must have the same length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("training data must be finite")
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "outputs", y)
        self.inputs.setflags(write=False)
        self.outputs.setflags(write=False)

    @classmethod
    def empty(cls, input_dim: int) -> "Dataset":
        return cls(np.empty((0, input_dim)), np.empty(0))

    @property
    def size(self) -> int:
        return self.inputs.shape[0]


def kernel_eval(params: KernelParams, x: np.ndarray, x2: np.ndarray) -> float:
    """k(x, x') = sigma_r^2 exp(-1/2 sum_i d_i (x_i - x'_i)^2)."""
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x.shape != x2.shape or x.shape != (params.input_dim,):
        raise ValueError("query dimension mismatch")
    d2 = np.sum(params.weights * (x - x2) ** 2)
    return float(params.signal_variance * np.exp(-0.5 * d2))


def kernel_matrix(params: KernelParams, xa: np.ndarray, xb: np.ndarray) -> np.ndarray:
    """Cross-covariance matrix between two point sets, shapes (A, m) and (B, m)."""
    sw = np.sqrt(params.weights)
    da = xa * sw
    db = xb * sw
    d2 = (
        np.sum(da**2, axis=1)[:, None]
        + np.sum(db**2, axis=1)[None, :]
        - 2.0 * da @ db.T
    )
    return params.signal_variance * np.exp(-0.5 * np.maximum(d2, 0.0))


@dataclass(frozen=True)
class GPModel:
    """Trained regressor: kernel params, data and a cached Cholesky factor."""

    params: KernelParams
    data: Dataset
    chol: np.ndarray = field(repr=False)
    alpha: np.ndarray = field(repr=False)
    jitter: float = 0.0


def fit(data: Dataset, params: KernelParams) -> GPModel:
    """Factorize K(X) + sigma_o^2 I and cache the solve for fast queries.

    Escalating jitter (1e-10, x10 up to 1e-6) is added if the factorization
    fails, which should not happen for sigma_o^2 > 0 on reasonable data.
    """
    if data.size and data.inputs.shape[1] != params.input_dim:
        raise ValueError("dataset input dimension does not match kernel weights")
    k = kernel_matrix(params, data.inputs, data.inputs)
    k[np.diag_indices_from(k)] += params.noise_variance
    jitter = 0.0
    while True:
        try:
            chol = np.linalg.cholesky(k + jitter * np.eye(data.size))
            break
        except np.linalg.LinAlgError:
            jitter = 1e-10 if jitter == 0.0 else jitter * 10.0
            if jitter > 1e-6:
                cond = np.linalg.cond(k)
                raise GPFitError(
                    f"Gram matrix factorization failed (cond ~ {cond:.3e}) "
                    "despite jitter up to 1e-6"
                ) from None
    alpha = _chol_solve(chol, data.outputs)
    return GPModel(params=params, data=data, chol=chol, alpha=alpha, jitter=jitter)


def _chol_solve(chol: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.linalg.solve(chol.T, np.linalg.solve(chol, b))


def predict(model: GPModel, x: np.ndarray) -> tuple[float, float]:
    """Posterior mean and variance at a single query point."""
    mu, var = predict_batch(model, np.atleast_2d(np.asarray(x, dtype=float)))
    return float(mu[0]), float(var[0])


def predict_batch(model: GPModel, xq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and variance at queries of shape (Q, m)."""
    xq = np.asarray(xq, dtype=float)
    if xq.ndim != 2 or xq.shape[1] != model.params.input_dim:
        raise ValueError("query dimension mismatch")
    sf2 = model.params.signal_variance
    if model.data.size == 0:
        q = xq.shape[0]
        return np.zeros(q), np.full(q, sf2)
    kq = kernel_matrix(model.params, model.data.inputs, xq)
    mean = kq.T @ model.alpha
    v = np.linalg.solve(model.chol, kq)
    var = sf2 - np.sum(v**2, axis=0)
    return mean, var
