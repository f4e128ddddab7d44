import numpy as np
import pytest
import scipy.linalg

from gpcons.gp import (Dataset, GPModel, KernelParams, fit, kernel_eval,
                       kernel_matrix, predict, predict_batch)


def params(m=2, sf2=1.0, noise=0.01):
    return KernelParams(signal_variance=sf2, weights=np.ones(m),
                        noise_variance=noise)


def dense_oracle(p, x_train, y_train, x_query):
    """Independent dense path: explicit kernel loops + full linear solve."""
    m_count = len(x_train)
    k_mat = np.array([[kernel_eval(p, a, b) for b in x_train] for a in x_train])
    k_mat += p.noise_variance * np.eye(m_count)
    kq = np.array([kernel_eval(p, a, x_query) for a in x_train])
    sol = np.linalg.solve(k_mat, y_train)
    mean = kq @ sol
    var = kernel_eval(p, x_query, x_query) - kq @ np.linalg.solve(k_mat, kq)
    return mean, var


def test_kernel_zero_distance_and_symmetry():
    p = params()
    x = np.array([0.3, -1.2])
    x2 = np.array([1.0, 0.4])
    assert kernel_eval(p, x, x) == pytest.approx(p.signal_variance)
    assert kernel_eval(p, x, x2) == kernel_eval(p, x2, x)
    assert kernel_eval(p, x, x2) <= p.signal_variance


def test_kernel_hand_value():
    p = params()
    val = kernel_eval(p, np.zeros(2), np.ones(2))
    assert val == pytest.approx(np.exp(-1.0), abs=1e-12)


def test_kernel_dimension_mismatch():
    with pytest.raises(ValueError):
        kernel_eval(params(2), np.zeros(2), np.zeros(3))


def test_kernel_params_validation():
    with pytest.raises(ValueError):
        KernelParams(signal_variance=0.0, weights=np.ones(2), noise_variance=0.01)
    with pytest.raises(ValueError):
        KernelParams(signal_variance=1.0, weights=np.array([1.0, -1.0]),
                     noise_variance=0.01)
    with pytest.raises(ValueError):
        KernelParams(signal_variance=1.0, weights=np.ones(2),
                     noise_variance=np.inf)


def test_empty_dataset_is_prior():
    p = params()
    model = fit(Dataset.empty(2), p)
    mean, var = predict(model, np.array([0.5, 0.5]))
    assert mean == 0.0
    assert var == p.signal_variance


def test_single_point_closed_form():
    p = params()
    x0 = np.array([0.4, -0.7])
    y0 = 1.3
    model = fit(Dataset(x0[None, :], [y0]), p)
    mean, var = predict(model, x0)
    sf2, so2 = p.signal_variance, p.noise_variance
    assert mean == pytest.approx(sf2 * y0 / (sf2 + so2), abs=1e-12)
    assert var == pytest.approx(sf2 - sf2**2 / (sf2 + so2), abs=1e-12)


def test_matches_dense_oracle():
    rng = np.random.default_rng(0)
    p = params()
    x_train = rng.uniform(-2, 2, size=(50, 2))
    y_train = rng.standard_normal(50)
    model = fit(Dataset(x_train, y_train), p)
    for _ in range(10):
        xq = rng.uniform(-2, 2, size=2)
        mean, var = predict(model, xq)
        mean_o, var_o = dense_oracle(p, x_train, y_train, xq)
        assert mean == pytest.approx(mean_o, abs=1e-10)
        assert var == pytest.approx(var_o, abs=1e-10)


def test_variance_bounds_and_shrinkage():
    rng = np.random.default_rng(1)
    p = params()
    x_train = rng.uniform(-2, 2, size=(30, 2))
    model = fit(Dataset(x_train, rng.standard_normal(30)), p)
    queries = rng.uniform(-2, 2, size=(100, 2))
    _, var = predict_batch(model, queries)
    assert np.all(var > 0)
    assert np.all(var <= p.signal_variance + 1e-12)


def test_interpolation_with_vanishing_noise():
    rng = np.random.default_rng(2)
    p = KernelParams(signal_variance=1.0, weights=np.ones(1),
                     noise_variance=1e-10)
    x_train = np.linspace(-2, 2, 5)[:, None]
    y_train = np.sin(3 * x_train[:, 0])
    model = fit(Dataset(x_train, y_train), p)
    mean, _ = predict_batch(model, x_train)
    assert np.abs(mean - y_train).max() < 1e-6


def test_predict_deterministic():
    rng = np.random.default_rng(3)
    p = params()
    data = Dataset(rng.uniform(-1, 1, size=(20, 2)), rng.standard_normal(20))
    m1 = fit(data, p)
    m2 = fit(data, p)
    xq = rng.uniform(-1, 1, size=(5, 2))
    out1 = predict_batch(m1, xq)
    out2 = predict_batch(m2, xq)
    assert np.array_equal(out1[0], out2[0])
    assert np.array_equal(out1[1], out2[1])


def test_gram_matrix_spd_with_noise():
    rng = np.random.default_rng(4)
    p = params()
    x = rng.uniform(-1, 1, size=(12, 2))
    gram = kernel_matrix(p, x, x)
    assert np.allclose(gram, gram.T, atol=1e-15)
    eig = scipy.linalg.eigh(gram + p.noise_variance * np.eye(12),
                            eigvals_only=True)
    assert eig[0] >= p.noise_variance * (1 - 1e-8)


def test_jitter_escalation_on_degenerate_gram():
    # duplicated inputs with essentially zero noise force the jitter path
    p = KernelParams(signal_variance=1.0, weights=np.ones(1),
                     noise_variance=1e-300)
    x = np.zeros((40, 1))
    model = fit(Dataset(x, np.ones(40)), p)
    assert model.jitter > 0
    mean, _ = predict(model, np.array([0.0]))
    assert mean == pytest.approx(1.0, rel=1e-3)


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.zeros((3, 2)), np.zeros(2))
    with pytest.raises(ValueError):
        Dataset(np.array([[np.nan, 0.0]]), np.array([1.0]))


def test_query_dimension_mismatch():
    model = fit(Dataset.empty(2), params())
    with pytest.raises(ValueError):
        predict(model, np.zeros(3))
