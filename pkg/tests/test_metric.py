import numpy as np
import pytest

from fockapr.errors import QuadratureUnderResolved
from fockapr.linalg import WeightSpec
from fockapr.metric import (Cube, avg_norm, checkerboard_fractions, dual_norm,
                            dual_oracle, dual_pointwise_avg,
                            ellipsoidal_oracle, pointwise_metric, sphere_sample,
                            sup_norm)

# independently computed: 2*sinh(0.5)
TWO_SINH_HALF = 1.0421906109874948


def origin_cube(side=1.0):
    return Cube(np.zeros(1, dtype=complex), side)


def test_cube_geometry():
    Q = Cube(np.array([1.0 + 2.0j]), 0.5)
    assert Q.volume == pytest.approx(0.25)
    nodes = Q.midpoint_nodes(4)
    assert nodes.shape == (16, 1)
    assert np.all(np.abs(nodes - (1.0 + 2.0j)) <= 0.5 * np.sqrt(2) / 2)
    assert Q.scaled(3).side == pytest.approx(1.5)


def test_checkerboard_fractions_exact():
    even, odd = checkerboard_fractions(origin_cube(1.0), 0.5)
    assert even == pytest.approx(0.5)
    # a cube aligned inside one even cell
    Q = Cube(np.array([0.25 + 0.25j]), 0.5)
    even, odd = checkerboard_fractions(Q, 0.5)
    assert even == pytest.approx(1.0) and odd == pytest.approx(0.0)


def test_pointwise_metric_ellipsoidal():
    spec = WeightSpec.constant(np.diag([4.0, 1.0]))
    rho = pointwise_metric(spec, 2, 0.0)
    assert rho(np.array([1.0, 0.0])) == pytest.approx(2.0)
    assert rho(np.array([0.0, 1.0])) == pytest.approx(1.0)


def test_avg_norm_scalar_exp_closed_form():
    spec = WeightSpec.scalar_exp(1.0)
    rho = avg_norm(spec, 2, origin_cube(), 32)
    assert rho(np.ones(1)) ** 2 == pytest.approx(TWO_SINH_HALF, rel=1e-4)


def test_avg_norm_checkerboard_exact():
    A, B = np.diag([4.0, 1.0]), np.diag([1.0, 4.0])
    spec = WeightSpec.checkerboard(A, B, 0.5)
    rho = avg_norm(spec, 2, origin_cube(), 8)
    # mean weight is 2.5 I exactly, so the p=2 average is sqrt(2.5)|x|
    assert rho(np.array([1.0, 0.0])) == pytest.approx(np.sqrt(2.5))
    assert rho.is_ellipsoidal()


def test_under_resolution_guard():
    spec = WeightSpec.scalar_exp(2.0)
    with pytest.raises(QuadratureUnderResolved):
        avg_norm(spec, 2, origin_cube(2.0), 4, check_tol=1e-8)


def test_sup_norm_checkerboard():
    A, B = np.diag([4.0, 1.0]), np.diag([1.0, 4.0])
    spec = WeightSpec.checkerboard(A, B, 0.5)
    rho = sup_norm(spec, origin_cube())
    assert rho(np.array([1.0, 0.0])) == pytest.approx(4.0)


def test_dual_pointwise_avg_p1_is_sup():
    spec = WeightSpec.scalar_exp(1.0)
    rho = dual_pointwise_avg(spec, 1, origin_cube(), 32)
    # ess sup of e^{-x} over [-1/2, 1/2] is e^{1/2}; midpoint sampling at
    # resolution 32 sees at best x = -1/2 + 1/64
    assert rho(np.ones(1)) == pytest.approx(np.exp(0.5 - 1.0 / 64), rel=1e-3)


def test_dual_norm_ellipsoidal_exact():
    M = np.array([[2.0, 0.0], [0.0, 1.0]])
    rho = ellipsoidal_oracle(M)
    x = np.array([1.0, 1.0], dtype=complex)
    assert dual_norm(rho, x) == pytest.approx(np.linalg.norm([0.5, 1.0]))


def test_dual_norm_sampled_matches_exact():
    M = np.array([[2.0, 0.3], [0.3, 1.0]])
    exact = ellipsoidal_oracle(M)
    blind = ellipsoidal_oracle(M)
    blind.matrix = None  # force the sampled path
    x = np.array([0.7, -0.2 + 0.4j])
    assert dual_norm(blind, x) == pytest.approx(dual_norm(exact, x), rel=1e-5)


def test_dual_oracle_wraps():
    spec = WeightSpec.constant(np.diag([4.0, 1.0]))
    rho = avg_norm(spec, 2, origin_cube(), 8)
    dual = dual_oracle(rho)
    assert dual(np.array([1.0, 0.0])) == pytest.approx(0.5)


def test_sphere_sample_deterministic():
    X1 = sphere_sample(2, 50, seed=3)
    X2 = sphere_sample(2, 50, seed=3)
    assert np.array_equal(X1, X2)
    assert np.allclose(np.linalg.norm(X1, axis=1), 1.0)
    assert X1.shape == (54, 2)  # includes basis and i*basis directions
