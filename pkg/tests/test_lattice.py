import numpy as np
import pytest

from fockapr.errors import NotLatticePoint
from fockapr.lattice import (LatticePath, check_lattice_comparison,
                             discrete_path, path_cubes)
from fockapr.linalg import WeightSpec


def test_trivial_path():
    nu = np.array([0.5, 0.5])
    path = discrete_path(nu, nu, 0.5)
    assert path.k == 0
    path.validate()


def test_single_step_path():
    nu = np.array([0.0, 0.0])
    nup = np.array([0.5, 0.0])
    path = discrete_path(nu, nup, 0.5)
    assert path.k == 1
    path.validate()


def test_diagonal_path_length():
    # three steps across (1, 0.5, 0.5) with r = 0.5; the bound
    # sqrt(2)|nu - nu'|/r = sqrt(2)*sqrt(1.5)/0.5 ~ 3.46 holds
    nu = np.zeros(3)
    nup = np.array([1.0, 0.5, 0.5])
    path = discrete_path(nu, nup, 0.5)
    assert path.k == 4
    path.validate()
    bound = np.sqrt(len(nu)) * np.linalg.norm(nup - nu) / 0.5
    assert path.k <= bound


def test_not_lattice_point():
    with pytest.raises(NotLatticePoint):
        discrete_path(np.array([0.3, 0.0]), np.array([0.5, 0.0]), 0.5)


def test_reversal():
    nu = np.array([0.0, -1.0, 0.5, 0.0])
    nup = np.array([1.5, 0.0, 0.5, -0.5])
    fwd = discrete_path(nu, nup, 0.5)
    rev = fwd.reversed()
    rev.validate()
    assert rev.k == fwd.k
    assert np.allclose(rev.points[0], nup) and np.allclose(rev.points[-1], nu)


def test_random_pairs_validate():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        n = int(rng.integers(1, 3))
        r = float(rng.choice([0.25, 0.5, 1.0]))
        nu = r * rng.integers(-6, 7, size=2 * n).astype(float)
        nup = r * rng.integers(-6, 7, size=2 * n).astype(float)
        path = discrete_path(nu, nup, r)
        path.validate()
        bound = np.sqrt(2 * n) * np.linalg.norm(nup - nu) / r
        assert path.k <= bound + 1e-12


def test_path_cubes():
    path = discrete_path(np.zeros(2), np.array([1.0, 0.5]), 0.5)
    cubes = path_cubes(path)
    assert len(cubes) == path.k + 1
    assert all(Q.side == pytest.approx(0.5) for Q in cubes)


def test_comparison_constant_weight():
    spec = WeightSpec.constant(np.diag([4.0, 1.0]))
    out = check_lattice_comparison(spec, 2.0, 0.5, np.zeros(2),
                                   np.array([1.0, 0.5]),
                                   np.array([1.0, 0.0]), 1.0, resolution=8)
    assert out["pass"] and out["op_pass"]
    # constant weight: both cube averages see the same metric, so the
    # comparison holds with factor 1 and the reducer ratio is the identity
    assert out["lhs"] == pytest.approx(2.0, rel=1e-6)
    assert out["op_lhs"] == pytest.approx(1.0, rel=1e-6)


def test_comparison_scalar_exp():
    spec = WeightSpec.scalar_exp(1.0)
    out = check_lattice_comparison(spec, 2.0, 0.5, np.array([2.0, 0.0]),
                                   np.array([0.0, 0.0]),
                                   np.ones(1), 1.5, resolution=16)
    assert out["pass"] and out["op_pass"]
    assert out["lhs"] <= out["rhs"] * (1 + 1e-9)
    # cube averages of e^x two units apart differ by exactly e, so the
    # scalar reducer ratio is e
    assert out["op_lhs"] == pytest.approx(np.e, rel=1e-3)
