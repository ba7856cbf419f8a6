"""Pointwise metrics rho_z, cube-averaged norms, and dual norms.

A "metric" here is a measurable assignment z -> norm on C^d; for a matrix
weight it is rho_z(x) = |W^{1/p}(z) x|.  Cube averages use composite
midpoint quadrature on the real 2n-cube; the checkerboard family is
averaged exactly from cell-overlap fractions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import QuadratureUnderResolved, RefinementStalled
from .linalg import as_point, matrix_power, weight_at_points

DEFAULT_QUAD_TOL = 5e-3


@dataclass(frozen=True)
class Cube:
    """Axis-aligned cube in C^n ~ R^{2n}: complex center and side length."""

    center: np.ndarray  # complex (n,)
    side: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not self.side > 0:
            raise ValueError("cube side must be positive")

    @property
    def n(self):
        return self.center.size

    @property
    def volume(self):
        return self.side ** (2 * self.n)

    def scaled(self, factor):
        """Concentric cube with side scaled by factor (e.g. 3Q)."""
        return Cube(self.center, self.side * factor)

    def midpoint_nodes(self, points_per_axis):
        """Tensor midpoint nodes, returned as complex (m^{2n}, n)."""
        m = int(points_per_axis)
        h = self.side / m
        axis = -self.side / 2 + h * (np.arange(m) + 0.5)
        grids = np.meshgrid(*([axis] * (2 * self.n)), indexing="ij")
        coords = np.stack([g.ravel() for g in grids], axis=-1)  # (m^{2n}, 2n)
        pts = coords[:, 0::2] + 1j * coords[:, 1::2]
        return pts + self.center[None, :]


class NormOracle:
    """A pure mapping C^d -> [0, inf) satisfying the norm axioms.

    `tag` records how the norm was built: 'pointwise', 'p-average', 'sup', 'dual', or
    'ellipsoidal'.  An ellipsoidal oracle carries the Hermitian PD matrix M
    with value(x) = |M x|, which downstream code exploits for exact duals
    and reducing operators.
    """

    def __init__(self, dim, fn, tag, matrix=None):
        self.dim = dim
        self._fn = fn
        self.tag = tag
        self.matrix = None if matrix is None else np.asarray(matrix, dtype=complex)

    def __call__(self, x):
        """Evaluate on a single vector (d,) or a batch (S, d)."""
        x = np.asarray(x, dtype=complex)
        single = x.ndim == 1
        vals = self._fn(x[None, :] if single else x)
        return float(vals[0]) if single else vals

    def is_ellipsoidal(self):
        return self.matrix is not None


def ellipsoidal_oracle(M, tag="ellipsoidal"):
    M = np.asarray(M, dtype=complex)

    def fn(X):
        # |M x| evaluated row-wise over the batch
        return np.linalg.norm(X @ M.T, axis=-1)

    return NormOracle(M.shape[0], fn, tag, matrix=M)


def _weighted_power_mean_oracle(mats, weights, p, dim, tag, matrix=None):
    """Oracle x -> (sum_i w_i |A_i x|^p)^{1/p} with sum w_i = 1."""
    mats = np.asarray(mats)
    weights = np.asarray(weights, dtype=float)

    def fn(X):
        # (N, d, d) @ (S, d) -> norms (N, S)
        T = np.einsum("nij,sj->nsi", mats, X)
        nr = np.linalg.norm(T, axis=-1)
        acc = np.einsum("n,ns->s", weights, nr ** p)
        return np.maximum(acc, 0.0) ** (1.0 / p)

    return NormOracle(dim, fn, tag, matrix=matrix)


def _max_oracle(mats, dim, tag):
    mats = np.asarray(mats)

    def fn(X):
        T = np.einsum("nij,sj->nsi", mats, X)
        return np.linalg.norm(T, axis=-1).max(axis=0)

    return NormOracle(dim, fn, tag)


def checkerboard_fractions(cube, s):
    """Volume fractions of a cube lying in even- and odd-parity cells.

    Per axis the cube edge splits into segments of alternating cell parity;
    the joint even fraction is (prod(E_i + O_i) + prod(E_i - O_i)) / 2.
    """
    lo = np.empty(2 * cube.n)
    lo[0::2] = cube.center.real - cube.side / 2
    lo[1::2] = cube.center.imag - cube.side / 2
    diff = 1.0  # prod of (E_i - O_i) normalized per axis
    for a in lo:
        b = a + cube.side
        # signed length: even-parity length minus odd-parity length in [a, b]
        k0, k1 = np.floor(a / s), np.floor(b / s)
        signed = 0.0
        for k in np.arange(k0, k1 + 1):
            seg = min(b, (k + 1) * s) - max(a, k * s)
            if seg > 0:
                signed += seg if int(k) % 2 == 0 else -seg
        diff *= signed / cube.side
    even = (1.0 + diff) / 2.0
    return even, 1.0 - even


def pointwise_metric(spec, p, z):
    """rho_z(x) = |W^{1/p}(z) x|, tagged ellipsoidal."""
    if p < 1:
        raise ValueError("p must be >= 1")
    W = weight_at_points(spec, as_point(z, spec.n)[None, :])[0]
    return ellipsoidal_oracle(matrix_power(W, 1.0 / p), tag="pointwise")


def _avg_oracle(spec, exponent, power, Q, res, tag, check_tol):
    """Average of |W^power(z) x|^exponent over Q, to the 1/exponent.

    Checkerboard specs are averaged exactly; smooth kinds use midpoint
    quadrature at `res` points per axis with a half-resolution Richardson
    error estimate as the under-resolution guard.
    """
    d = spec.d
    if spec.kind == "checkerboard":
        fa, fb = checkerboard_fractions(Q, spec.params["s"])
        A = matrix_power(spec.params["A"], power)
        B = matrix_power(spec.params["B"], power)
        mats = np.stack([A, B])
        orc = _weighted_power_mean_oracle(mats, [fa, fb], exponent, d, tag)
        if exponent == 2:
            M2 = fa * (A @ A) + fb * (B @ B)
            orc.matrix = matrix_power(M2, 0.5)
        return orc
    if spec.kind == "constant":
        M = matrix_power(spec.params["matrix"], power)
        return ellipsoidal_oracle(M, tag=tag)
    if spec.kind in ("scalar_exp", "scalar_power"):
        # W = w(z) I, so the average is the scalar quadrature times I
        res = int(res)
        if res < 4:
            raise ValueError("quad_points_per_axis must be >= 4")

        def scalar_avg(m):
            w = weight_at_points(spec, Q.midpoint_nodes(m))[:, 0, 0].real
            return float(np.mean(w ** (power * exponent)) ** (1.0 / exponent))

        s = scalar_avg(res)
        if check_tol is not None:
            sc = scalar_avg(max(res // 2, 2))
            if abs(s - sc) / (3.0 * s) > check_tol:
                raise QuadratureUnderResolved(
                    f"estimated quadrature error exceeds {check_tol:.2e}; "
                    f"raise quad_points_per_axis (currently {res})")
        return ellipsoidal_oracle(s * np.eye(d), tag=tag)

    res = int(res)
    if res < 4:
        raise ValueError("quad_points_per_axis must be >= 4")
    nodes = Q.midpoint_nodes(res)
    Ws = weight_at_points(spec, nodes)
    mats = matrix_power(Ws, power)
    N = nodes.shape[0]
    orc = _weighted_power_mean_oracle(mats, np.full(N, 1.0 / N), exponent, d, tag)

    if check_tol is not None:
        coarse_nodes = Q.midpoint_nodes(max(res // 2, 2))
        cm = matrix_power(weight_at_points(spec, coarse_nodes), power)
        Nc = coarse_nodes.shape[0]
        coarse = _weighted_power_mean_oracle(
            cm, np.full(Nc, 1.0 / Nc), exponent, d, tag)
        probes = np.eye(d, dtype=complex)
        vf = orc(probes)
        vc = coarse(probes)
        # midpoint error is O(h^2): |fine - coarse|/3 estimates the fine error
        est = np.max(np.abs(vf - vc) / (3.0 * np.maximum(vf, 1e-300)))
        if est > check_tol:
            raise QuadratureUnderResolved(
                f"estimated quadrature error {est:.2e} exceeds {check_tol:.2e}; "
                f"raise quad_points_per_axis (currently {res})")

    if exponent == 2:
        # the p=2 average is itself ellipsoidal: x* (avg W^{2*power}) x
        sq = np.einsum("nij,njk->ik", mats.conj().transpose(0, 2, 1), mats) / N
        orc.matrix = matrix_power(0.5 * (sq + sq.conj().T), 0.5)
    return orc


def avg_norm(spec, p, Q, quad_points_per_axis=24, check_tol=DEFAULT_QUAD_TOL):
    """rho_{p,Q}(x) = (mean over Q of |W^{1/p}(z) x|^p)^{1/p}."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return _avg_oracle(spec, p, 1.0 / p, Q, quad_points_per_axis,
                       "p-average", check_tol)


def sup_norm(spec, Q, sample_points_per_axis=24):
    """rho_{inf,Q}(x) = sup over Q of |W(z) x| (cell-interior sampling)."""
    if spec.kind == "checkerboard":
        fa, fb = checkerboard_fractions(Q, spec.params["s"])
        mats = [m for m, f in ((spec.params["A"], fa), (spec.params["B"], fb))
                if f > 0]
        return _max_oracle(np.stack(mats).astype(complex), spec.d, "sup")
    if spec.kind == "constant":
        return ellipsoidal_oracle(
            np.asarray(spec.params["matrix"], dtype=complex), tag="sup")
    nodes = Q.midpoint_nodes(sample_points_per_axis)
    return _max_oracle(weight_at_points(spec, nodes), spec.d, "sup")


def dual_pointwise_avg(spec, p, Q, quad_points_per_axis=24,
                       check_tol=DEFAULT_QUAD_TOL):
    """The averaged dual metric rho*_{p',Q}: average of |W^{-1/p}(z) x|
    with exponent p' (the essential sup when p = 1)."""
    if p == 1:
        if spec.kind == "checkerboard":
            fa, fb = checkerboard_fractions(Q, spec.params["s"])
            mats = [matrix_power(m, -1.0)
                    for m, f in ((spec.params["A"], fa), (spec.params["B"], fb))
                    if f > 0]
            return _max_oracle(np.stack(mats), spec.d, "sup")
        if spec.kind == "constant":
            return ellipsoidal_oracle(
                matrix_power(spec.params["matrix"], -1.0), tag="sup")
        nodes = Q.midpoint_nodes(quad_points_per_axis)
        if spec.kind in ("scalar_exp", "scalar_power"):
            w = weight_at_points(spec, nodes)[:, 0, 0].real
            return ellipsoidal_oracle(float((1.0 / w).max()) * np.eye(spec.d),
                                      tag="sup")
        return _max_oracle(
            matrix_power(weight_at_points(spec, nodes), -1.0), spec.d, "sup")
    pp = p / (p - 1.0)
    return _avg_oracle(spec, pp, -1.0 / p, Q, quad_points_per_axis,
                       "p-average", check_tol)


# -- dual norms -------------------------------------------------------------


def sphere_sample(d, count, seed=0):
    """Deterministic sample of unit vectors in C^d, including the basis
    directions and their i-multiples."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((count, d)) + 1j * rng.standard_normal((count, d))
    X /= np.linalg.norm(X, axis=1)[:, None]
    eye = np.eye(d, dtype=complex)
    return np.concatenate([eye, 1j * eye, X], axis=0)


def _refine_on_sphere(objective, y0, v0, step=0.1, min_step=1e-8):
    """Compass ascent of a scale-invariant objective over the unit sphere of
    C^d viewed as S^{2d-1}.  Returns (best value, best point)."""
    d = y0.size
    dirs = np.concatenate([np.eye(d), 1j * np.eye(d)], axis=0)
    dirs = np.concatenate([dirs, -dirs], axis=0)  # (4d, d)
    y, v = y0, v0
    while step > min_step:
        cand = y[None, :] + step * dirs
        cand /= np.linalg.norm(cand, axis=1)[:, None]
        vals = objective(cand)
        j = int(np.argmax(vals))
        if vals[j] > v:
            y, v = cand[j], float(vals[j])
        else:
            step *= 0.5
    return v, y


def dual_norm(rho, x, samples=2000, seed=0, stall_factor=1.10):
    """(rho)^*(x) = sup_y |<x, y>| / rho(y).

    Exact for ellipsoidal oracles; otherwise a deterministic sphere sample
    followed by compass refinement, returning a certified lower estimate.
    """
    x = np.asarray(x, dtype=complex)
    if rho.is_ellipsoidal():
        return float(np.linalg.norm(np.linalg.solve(rho.matrix, x)))
    nx = np.linalg.norm(x)
    if nx == 0:
        return 0.0

    def objective(Y):
        return np.abs(Y.conj() @ x) / np.maximum(rho(Y), 1e-300)

    Y = sphere_sample(rho.dim, samples, seed=seed)
    vals = objective(Y)
    j = int(np.argmax(vals))
    coarse = float(vals[j])
    best, _ = _refine_on_sphere(objective, Y[j], coarse)
    if best > coarse * stall_factor:
        raise RefinementStalled(
            f"refinement improved {best / coarse - 1:.1%} over the coarse "
            f"sphere sample; increase `samples`")
    return best


def dual_oracle(rho, samples=2000, seed=0):
    """The dual norm of `rho` packaged as a NormOracle."""
    if rho.is_ellipsoidal():
        inv = np.linalg.inv(rho.matrix)
        orc = ellipsoidal_oracle(0.5 * (inv + inv.conj().T), tag="dual")
        return orc

    def fn(X):
        return np.array([dual_norm(rho, x, samples=samples, seed=seed)
                         for x in X])

    return NormOracle(rho.dim, fn, "dual")
