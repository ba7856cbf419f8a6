"""The discrete lattice r Z^{2n}, axis walks between its points, and the
cube-average comparison along such walks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotLatticePoint
from .linalg import operator_norm, real_to_point
from .metric import Cube, avg_norm
from .reduce import reducing_operator

LATTICE_SNAP = 1e-9


@dataclass(frozen=True)
class LatticePath:
    """Axis path a_0, ..., a_k in r Z^{2n}: consecutive points differ by
    exactly r in exactly one coordinate."""

    r: float
    points: tuple  # of R^{2n} tuples

    @property
    def k(self):
        return len(self.points) - 1

    def reversed(self):
        return LatticePath(self.r, tuple(reversed(self.points)))

    def validate(self):
        """Assert the three defining invariants; returns self."""
        pts = np.asarray(self.points, dtype=float)
        for j in range(1, len(pts)):
            diff = pts[j] - pts[j - 1]
            nz = np.abs(diff) > LATTICE_SNAP
            if nz.sum() != 1 or abs(np.abs(diff[nz][0]) - self.r) > LATTICE_SNAP:
                raise ValueError("consecutive points must differ by r in one coordinate")
        nu, nup = pts[0], pts[-1]
        bound = np.sqrt(pts.shape[1]) * np.linalg.norm(nu - nup) / self.r
        if self.k > bound + LATTICE_SNAP:
            raise ValueError("path length exceeds sqrt(2n)|nu - nu'| / r")
        return self


def _to_lattice_indices(v, r):
    v = np.asarray(v, dtype=float)
    idx = np.round(v / r)
    if np.abs(v - idx * r).max() > LATTICE_SNAP * max(1.0, r):
        raise NotLatticePoint(f"{v.tolist()} is not on the step-{r} lattice")
    return idx.astype(int)


def discrete_path(nu, nu_prime, r):
    """Coordinate-order walk from nu to nu_prime on r Z^{2n}.

    Walks coordinate 1 to completion, then coordinate 2, and so on, one
    +-r step at a time, giving k = sum_i |nu_i - nu'_i| / r steps.
    """
    i0 = _to_lattice_indices(nu, r)
    i1 = _to_lattice_indices(nu_prime, r)
    cur = i0.copy()
    pts = [tuple(cur * r)]
    for axis in range(cur.size):
        step = 1 if i1[axis] > cur[axis] else -1
        while cur[axis] != i1[axis]:
            cur[axis] += step
            pts.append(tuple(cur * r))
    return LatticePath(float(r), tuple(pts)).validate()


def path_cubes(path):
    """The side-r cubes centered on the path points."""
    return [Cube(real_to_point(np.asarray(a)), path.r) for a in path.points]


def check_lattice_comparison(spec, p, r, nu, nu_prime, x, apr_3r,
                             resolution=24, seed=0):
    """Compare rho_{p,Q_r(nu)}(x) against the path-product bound
    (3^{2n} A_{p,3r})^{sqrt(2n)|nu-nu'|/r} rho_{p,Q_r(nu')}(x).

    Returns a dict with lhs, rhs, pass flags for both the metric inequality
    and the reducing-operator corollary ||R_nu R_nu'^{-1}|| <= sqrt(d) * factor.
    Exponents are handled in log space to avoid overflow for long paths.
    """
    n = spec.n
    nu = np.asarray(nu, dtype=float)
    nup = np.asarray(nu_prime, dtype=float)
    path = discrete_path(nu, nup, r)
    x = np.asarray(x, dtype=complex)

    Q0 = Cube(real_to_point(nu), r)
    Q1 = Cube(real_to_point(nup), r)
    rho0 = avg_norm(spec, p, Q0, resolution, check_tol=None)
    rho1 = avg_norm(spec, p, Q1, resolution, check_tol=None)
    lhs = rho0(x)
    base_log = 2 * n * np.log(3.0) + np.log(apr_3r)
    expo = np.sqrt(2 * n) * np.linalg.norm(nu - nup) / r
    log_rhs = expo * base_log + np.log(max(rho1(x), 1e-300))
    metric_pass = np.log(max(lhs, 1e-300)) <= log_rhs + 1e-6

    R0 = reducing_operator(rho0, seed=seed)
    R1 = reducing_operator(rho1, seed=seed)
    op = operator_norm(R0.matrix @ np.linalg.inv(R1.matrix))
    log_op_rhs = 0.5 * np.log(spec.d) + expo * base_log
    op_pass = np.log(max(op, 1e-300)) <= log_op_rhs + 1e-6

    return {
        "path": path,
        "lhs": float(lhs),
        "log_rhs": float(log_rhs),
        "rhs": float(np.exp(log_rhs)) if log_rhs < 700 else float("inf"),
        "pass": bool(metric_pass),
        "op_lhs": float(op),
        "log_op_rhs": float(log_op_rhs),
        "op_pass": bool(op_pass),
    }
