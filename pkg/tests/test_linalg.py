import numpy as np
import pytest

from fockapr.errors import InvalidSpec, NumericalBreakdown
from fockapr.linalg import (HermitianPD, WeightSpec, eval_weight,
                            matrix_power, operator_norm, point_to_real,
                            real_to_point, weight_at_points)


def test_point_real_round_trip():
    z = np.array([1.0 + 2.0j, -0.5 + 0.25j])
    v = point_to_real(z)
    assert v.shape == (4,)
    assert np.allclose(v, [1.0, 2.0, -0.5, 0.25])
    assert np.allclose(real_to_point(v), z)


def test_hermitian_pd_validation():
    HermitianPD(np.diag([2.0, 1.0]))
    with pytest.raises(InvalidSpec):
        HermitianPD(np.array([[1.0, 1.0], [0.0, 1.0]]))  # not Hermitian
    with pytest.raises(InvalidSpec):
        HermitianPD(np.diag([1.0, -1.0]))  # not PD
    with pytest.raises(InvalidSpec):
        HermitianPD(np.ones((2, 3)))


def test_constant_weight():
    M = np.array([[2.0, 0.5], [0.5, 1.0]])
    spec = WeightSpec.constant(M)
    W = eval_weight(spec, 1.0 + 1.0j)
    assert np.allclose(np.asarray(W), M)


def test_scalar_exp_weight():
    spec = WeightSpec.scalar_exp(1.0, d=2)
    W = weight_at_points(spec, np.array([[0.5 + 3.0j]]))[0]
    assert np.allclose(W, np.exp(0.5) * np.eye(2))


def test_scalar_power_weight():
    spec = WeightSpec.scalar_power(2.0)
    W = weight_at_points(spec, np.array([[1.0 + 1.0j]]))[0]
    # (1 + |z|^2)^{gamma/2} = (1 + 2)^1 = 3
    assert np.allclose(W, 3.0)


def test_rotating_weight_half_turn():
    spec = WeightSpec.rotating(4.0, 1.0, np.pi)
    # at Re z = 1 the frame has rotated by pi, which preserves the diagonal
    W = weight_at_points(spec, np.array([[1.0 + 0.0j]]))[0]
    assert np.allclose(W, np.diag([4.0, 1.0]), atol=1e-12)
    W = weight_at_points(spec, np.array([[0.5 + 0.0j]]))[0]
    assert np.allclose(W, np.diag([1.0, 4.0]), atol=1e-12)


def test_checkerboard_parity_and_boundary_snap():
    A, B = np.diag([4.0, 1.0]), np.diag([1.0, 4.0])
    spec = WeightSpec.checkerboard(A, B, 1.0)
    assert np.allclose(weight_at_points(spec, np.array([[0.5 + 0.5j]]))[0], A)
    assert np.allclose(weight_at_points(spec, np.array([[1.5 + 0.5j]]))[0], B)
    # boundary points snap to the lower cell
    assert np.allclose(weight_at_points(spec, np.array([[1.0 + 0.5j]]))[0], A)


def test_weight_spec_validation():
    with pytest.raises(InvalidSpec):
        WeightSpec("mystery", 1, 1, {})
    with pytest.raises(InvalidSpec):
        WeightSpec.scalar_power(-1.0)
    with pytest.raises(InvalidSpec):
        WeightSpec("rotating", 3, 1, {"lam1": 1, "lam2": 1, "omega": 1})
    with pytest.raises(InvalidSpec):
        WeightSpec.checkerboard(np.eye(2), np.eye(2), -1.0)


def test_json_round_trip():
    spec = WeightSpec.checkerboard(np.diag([4.0, 1.0]), np.diag([1.0, 4.0]), 0.5)
    obj = spec.to_json_dict()
    back = WeightSpec.from_json_dict(obj)
    assert back.kind == spec.kind and back.d == spec.d
    assert np.allclose(back.params["A"], spec.params["A"])
    assert back.params["s"] == 0.5


def test_matrix_power_roundtrip():
    M = np.array([[2.0, 0.5 + 0.25j], [0.5 - 0.25j, 1.0]])
    R = matrix_power(M, 0.5)
    assert np.allclose(R @ R, M)
    batch = np.stack([M, 2 * M])
    Rb = matrix_power(batch, -1.0)
    assert np.allclose(Rb[0] @ M, np.eye(2))
    with pytest.raises(NumericalBreakdown):
        matrix_power(np.diag([1.0, 0.0]), 0.5)


def test_operator_norm():
    assert operator_norm(np.diag([3.0, 1.0])) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        operator_norm(np.array([[np.inf, 0.0], [0.0, 1.0]]))
