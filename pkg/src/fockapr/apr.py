"""Restricted A_{p,r} constants over fixed-side-length cube families.

Two estimators are computed per cube: the direct dual-norm ratio (a lower
estimate of the cube's constant) and the reducing-operator bracket value
||R_Q R*_Q|| which encloses the constant within a factor d.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .errors import RegionTooSmall
from .linalg import operator_norm, real_to_point
from .metric import (Cube, avg_norm, dual_norm, dual_pointwise_avg,
                     sphere_sample)
from .reduce import dual_reducer, reducing_operator


@dataclass(frozen=True)
class CubeResult:
    center: tuple
    direct_ratio: float
    sandwich_value: float


@dataclass(frozen=True)
class AprReport:
    p: float
    r: float
    region_halfwidth: float
    lattice_step: float
    dim: int
    per_cube: tuple
    apr_direct: float
    sandwich_sup: float

    @property
    def apr_interval(self):
        return (self.sandwich_sup / self.dim, self.sandwich_sup)

    def to_json_dict(self):
        return {
            "p": self.p,
            "r": self.r,
            "region_halfwidth": self.region_halfwidth,
            "lattice_step": self.lattice_step,
            "dim": self.dim,
            "apr_direct": self.apr_direct,
            "sandwich_sup": self.sandwich_sup,
            "apr_interval": list(self.apr_interval),
            "cubes": len(self.per_cube),
        }

    def write_csv(self, path):
        n = len(self.per_cube[0].center) // 2
        cols = []
        for i in range(n):
            cols += [f"center_x{i + 1}", f"center_y{i + 1}"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols + ["direct_ratio", "sandwich_value"])
            for rec in self.per_cube:
                w.writerow([f"{c:.17g}" for c in rec.center]
                           + [f"{rec.direct_ratio:.17g}",
                              f"{rec.sandwich_value:.17g}"])

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def direct_ratio(spec, p, Q, resolution=24, samples=400, seed=0):
    """sup_x rho*_{p',Q}(x) / (rho_{p,Q})^*(x): the cube's A_{p,r} ratio.

    Reported as a certified lower estimate (numerator by quadrature,
    denominator by refined sphere maximization).
    """
    num = dual_pointwise_avg(spec, p, Q, resolution, check_tol=None)
    rho = avg_norm(spec, p, Q, resolution, check_tol=None)
    if spec.d == 1:
        one = np.ones(1, dtype=complex)
        return float(num(one) * rho(one))
    if rho.is_ellipsoidal() and num.is_ellipsoidal():
        return operator_norm(num.matrix @ rho.matrix)

    X = sphere_sample(spec.d, samples, seed=seed)
    Y = sphere_sample(spec.d, 2000, seed=seed + 1)
    rhoY = np.maximum(rho(Y), 1e-300)

    # shared y-sample denominator for the coarse x-scan
    M = np.abs(X @ Y.conj().T)
    den = (M / rhoY[None, :]).max(axis=1)
    ratios = num(X) / np.maximum(den, 1e-300)
    j = int(np.argmax(ratios))

    def objective(Xb):
        Mb = np.abs(Xb @ Y.conj().T)
        db = (Mb / rhoY[None, :]).max(axis=1)
        return num(Xb) / np.maximum(db, 1e-300)

    from .metric import _refine_on_sphere

    _, x_best = _refine_on_sphere(objective, X[j], float(ratios[j]))
    final_den = dual_norm(rho, x_best, seed=seed + 2)
    return float(num(x_best) / final_den)


def sweep_centers(spec, r, region_halfwidth, lattice_step):
    """Cube-center lattice, collapsed along translation symmetries.

    Returns (centers, collapsed): centers is a list of R^{2n} vectors.
    """
    n = spec.n
    step = lattice_step
    if spec.kind in ("constant", "scalar_exp"):
        return [np.zeros(2 * n)], True
    if spec.kind == "rotating":
        period = 2 * np.pi / spec.params["omega"] if spec.params["omega"] else 0.0
        if period == 0.0:
            return [np.zeros(2 * n)], True
        lim = min(period, 2 * region_halfwidth)
        xs = np.arange(0.0, lim, step)
        out = []
        for x in xs:
            v = np.zeros(2 * n)
            v[0] = x
            out.append(v)
        return out, True
    if spec.kind == "checkerboard":
        period = 2 * spec.params["s"]
        axis = np.arange(0.0, period, step)
        grids = np.meshgrid(*([axis] * (2 * n)), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        return list(pts), True
    axis = np.arange(-region_halfwidth, region_halfwidth + step / 2, step)
    grids = np.meshgrid(*([axis] * (2 * n)), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    return list(pts), False


def apr_constant(spec, p, r, region_halfwidth=2.0, lattice_step=None,
                 resolution=24, seed=0, with_sandwich=True):
    """Sweep cube centers and aggregate the restricted A_{p,r} estimators."""
    if lattice_step is None:
        lattice_step = r / 2
    if lattice_step > r:
        raise ValueError("lattice_step must be <= r")
    centers, collapsed = sweep_centers(spec, r, region_halfwidth, lattice_step)
    records = []
    for v in centers:
        Q = Cube(real_to_point(v), r)
        dr = direct_ratio(spec, p, Q, resolution, seed=seed)
        if with_sandwich:
            rho = avg_norm(spec, p, Q, resolution, check_tol=None)
            R = reducing_operator(rho, seed=seed + 1)
            Rs = dual_reducer(spec, p, Q, resolution, seed=seed + 2)
            sv = operator_norm(R.matrix @ Rs.matrix)
        else:
            sv = float("nan")
        records.append(CubeResult(tuple(v), dr, sv))
    apr_direct = max(rec.direct_ratio for rec in records)
    sandwich_sup = max(rec.sandwich_value for rec in records)

    if not collapsed and len(records) > 1:
        coord_max = max(abs(c) for rec in records for c in rec.center)
        outer = [rec.direct_ratio for rec in records
                 if max(abs(c) for c in rec.center) >= coord_max - 1e-12]
        inner = [rec.direct_ratio for rec in records
                 if max(abs(c) for c in rec.center) < coord_max - 1e-12]
        if inner and max(outer) > max(inner) * 1.01:
            raise RegionTooSmall(
                f"per-cube ratio still increasing at the sweep boundary "
                f"({max(outer):.4f} > {max(inner):.4f}); enlarge the region")

    return AprReport(p, r, region_halfwidth, lattice_step, spec.d,
                     tuple(records), apr_direct, sandwich_sup)


def check_3Q(spec, p, r, Q, x, apr_3r=None, resolution=24):
    """The concentric-triple comparison: average over 3Q against the
    A_{p,3r}-scaled average over Q.  Returns (lhs, rhs, pass)."""
    if Q.side != r:
        raise ValueError("cube side must equal r")
    n = spec.n
    if apr_3r is None:
        apr_3r = apr_constant(spec, p, 3 * r, region_halfwidth=max(6 * r, 2.0),
                              resolution=resolution,
                              with_sandwich=False).apr_direct
    x = np.asarray(x, dtype=complex)
    lhs = avg_norm(spec, p, Q.scaled(3), resolution, check_tol=None)(x)
    rhs = 3.0 ** (2 * n * (1 - 1.0 / p)) * apr_3r \
        * avg_norm(spec, p, Q, resolution, check_tol=None)(x)
    return lhs, rhs, lhs <= rhs * (1 + 1e-6)


@dataclass(frozen=True)
class RadiiComparison:
    apr_r1: float
    apr_r2: float
    pass_lower: bool
    explicit_upper: float
    upper_ok: bool


def radii_explicit_upper(apr_r1, r1, r2, n, d):
    """The quantitative r1 -> r2 upper bound (very loose by design)."""
    g = 1.0 + 3.0 * r2 / r1
    log_val = (4 * n * n * g * np.log(3.0)
               + 2.5 * np.log(d)
               + 4 * n * np.log(2 * np.sqrt(r1 / r2) + 3 * np.sqrt(r2 / r1))
               + (1.0 + 2 * n * g) * np.log(apr_r1))
    return float(np.exp(log_val)) if log_val < 700 else float("inf")


def compare_radii(spec, p, r1, r2, region_halfwidth=2.0, resolution=24,
                  seed=0):
    """Monotone comparison of A_{p,r} constants across two side lengths."""
    if not 0 < r1 < r2:
        raise ValueError("need 0 < r1 < r2")
    region_halfwidth = max(region_halfwidth, 2 * r2)
    n = spec.n
    a1 = apr_constant(spec, p, r1, region_halfwidth, resolution=resolution,
                      seed=seed, with_sandwich=False).apr_direct
    a2 = apr_constant(spec, p, r2, region_halfwidth, resolution=resolution,
                      seed=seed, with_sandwich=False).apr_direct
    pass_lower = a1 <= (r2 / r1) ** (2 * n) * a2 * (1 + 1e-3)
    upper = radii_explicit_upper(a1, r1, r2, n, spec.d)
    return RadiiComparison(a1, a2, pass_lower, upper, a2 <= upper * (1 + 1e-6))
