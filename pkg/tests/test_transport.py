import numpy as np
import pytest
from scipy.linalg import expm, logm

from ncgpi1.errors import DivergenceDetected, OutsideConvergenceRadius
from ncgpi1.transport import (MatrixPath, half_step_consistency, inverse_transport, kernel_of_interval_part,
                              log_representation, log_series, path_ordered_exp, trivialize_flat)


def _cn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.mark.parametrize("method", ["picard", "rk4"])
def test_constant_scalar(method):
    c = 0.7 - 0.4j
    res = path_ordered_exp(MatrixPath.constant(c * np.eye(2)), method, steps=10_000)
    assert np.abs(res.alpha_at_1 - np.exp(c) * np.eye(2)).max() <= 1e-8


def test_commuting_family():
    # omega(t) = (1 + 2t) I, integral 2
    res = path_ordered_exp(MatrixPath.polynomial([np.eye(2), 2 * np.eye(2)]), "rk4", steps=2000)
    assert np.allclose(res.alpha_at_1, np.exp(2) * np.eye(2), atol=1e-9)


def test_noncommuting_methods_agree():
    A = np.array([[0, 1], [0, 0]], dtype=complex)
    B = np.array([[0, 0], [1, 0]], dtype=complex)
    res = path_ordered_exp(MatrixPath.polynomial([A, B]), "both", steps=10_000)
    assert res.agreement <= 1e-7
    assert res.bound_report["discrete_ok"]


def test_constant_matrix_against_expm():
    rng = np.random.default_rng(2)
    M = _cn(rng, 3, 3) * 0.5
    res = path_ordered_exp(MatrixPath.constant(M), "picard", steps=4000)
    assert np.abs(res.alpha_at_1 - expm(M)).max() <= 1e-6


def test_inverse_transport():
    c = 1.3
    res = inverse_transport(MatrixPath.constant(c * np.eye(1)), "picard", steps=10_000)
    assert abs(res.alpha_at_1[0, 0] - np.exp(-c)) <= 1e-8
    z = inverse_transport(MatrixPath.constant(np.zeros((2, 2))), "rk4", steps=100)
    assert np.allclose(z.values, np.eye(2))
    rng = np.random.default_rng(4)
    path = MatrixPath.polynomial([_cn(rng, 2, 2) * 0.3, _cn(rng, 2, 2) * 0.3])
    inv = inverse_transport(path, "rk4", steps=2000)
    assert inv.extra["product_error"] <= 1e-7


def test_trivialize_flat():
    z = trivialize_flat(MatrixPath.constant(np.zeros((2, 2))), steps=200)
    assert np.allclose(z.values, np.eye(2))
    rng = np.random.default_rng(6)
    K = _cn(rng, 2, 2) * 0.4
    res = trivialize_flat(MatrixPath.constant(K), steps=2000)
    for t_index in (500, 1000, 2000):
        t = res.times[t_index]
        assert np.allclose(res.values[t_index], expm(t * K), atol=1e-9)
    path = MatrixPath.polynomial([_cn(rng, 2, 2) * 0.3, _cn(rng, 2, 2) * 0.3])
    assert trivialize_flat(path, steps=4000).extra["conjugation_residual"] <= 1e-7


def test_kernel_of_interval_part():
    fr = kernel_of_interval_part(MatrixPath.constant(np.zeros((3, 3))), steps=100)
    assert np.allclose(fr.at_zero, np.eye(3))
    K = np.array([[0.2, 0.5], [-0.1, 0.3]], dtype=complex)
    fr = kernel_of_interval_part(MatrixPath.constant(K), steps=2000)
    assert np.allclose(fr.frame[-1], expm(-K), atol=1e-9)
    rng = np.random.default_rng(8)
    fr = kernel_of_interval_part(MatrixPath.polynomial([_cn(rng, 2, 2) * 0.3, _cn(rng, 2, 2) * 0.3]), steps=2000)
    assert fr.min_abs_det > 0.1 and fr.horizontality_residual < 1e-7


def test_picard_bound_report():
    res = path_ordered_exp(MatrixPath.constant(2.0 * np.eye(2)), "picard", steps=10_000)
    rep = res.bound_report
    assert rep["discrete_ok"] and rep["max_slack"] <= 0.05
    assert rep["sup_norm"] == pytest.approx(2.0)


def test_divergence_is_detected():
    with pytest.raises(DivergenceDetected):
        path_ordered_exp(MatrixPath.constant(60.0 * np.eye(1)), "picard", steps=4, terms=3)


def test_grid_path_interpolates():
    path = MatrixPath.grid([0.0, 1.0], [np.zeros((1, 1)), np.ones((1, 1))])
    assert path(0.5)[0, 0] == pytest.approx(0.5)
    with pytest.raises((ValueError, TypeError)):
        MatrixPath.grid([0.0], [np.zeros((1, 1))])


def test_log_examples():
    alpha = log_representation(np.array([[1, 0.5], [0, 1]]), 0.5)
    assert np.allclose(alpha, [[0, 1], [0, 0]], atol=1e-15)
    assert np.allclose(log_representation(np.eye(3), 2.0), 0)
    with pytest.raises(OutsideConvergenceRadius):
        log_series(np.eye(2) * 1.5)


def test_log_round_trip_against_scipy():
    rng = np.random.default_rng(10)
    for _ in range(20):
        a = _cn(rng, 3, 3)
        a *= 0.4 / np.linalg.norm(a, 2)
        t0 = 0.8
        sample = expm(t0 * a)
        rec = log_representation(sample, t0)
        assert np.abs(rec - a).max() <= 1e-10
        assert np.abs(rec - logm(sample) / t0).max() <= 1e-9
        assert half_step_consistency(sample, expm(t0 / 2 * a), t0) <= 1e-9
