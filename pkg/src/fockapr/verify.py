"""Randomized property suites binding the modules together.

Each suite runs `size` seeded cases of one inequality, recording both sides
of every comparison; failures are data (with full reproduction inputs),
not exceptions.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .apr import apr_constant, check_3Q, compare_radii
from .fockop import (QuadratureGrid, GridFunction, apply_localized,
                     localization_bound_check, localization_eigenvalue,
                     maximal_upper_bound, normalized_kernel_values,
                     projection_norm_p2, theorem_lower_bound)
from .lattice import check_lattice_comparison, discrete_path
from .linalg import WeightSpec, real_to_point
from .metric import Cube, avg_norm, dual_norm, dual_pointwise_avg, sphere_sample
from .reduce import reducing_operator
from .errors import FockAprError

SUITES = ("duality", "sandwich", "threeQ", "lattice", "localization",
          "radii", "theorem")


@dataclass
class SuiteReport:
    suite: str
    cases: int
    tolerances: dict
    failures: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self):
        return len(self.failures) == 0

    def to_json_text(self):
        """Canonical JSON; excludes wall time so identical (seed, size)
        runs are byte-identical."""
        return json.dumps(
            {"suite": self.suite, "cases": self.cases,
             "tolerances": self.tolerances, "failures": self.failures},
            sort_keys=True, indent=2, default=str) + "\n"

    def to_text(self):
        lines = [f"suite {self.suite}: {self.cases} cases, "
                 f"{len(self.failures)} failures "
                 f"({self.wall_time:.1f}s)"]
        for f in self.failures:
            lines.append(f"  FAIL {json.dumps(f, sort_keys=True, default=str)}")
        return "\n".join(lines)


# -- seeded generators -------------------------------------------------------


def random_pd(rng, d, max_cond=100.0):
    """Random Hermitian PD matrix with condition number <= max_cond."""
    G = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    Q, _ = np.linalg.qr(G)
    c = rng.uniform(1.0, max_cond)
    ev = np.exp(rng.uniform(-0.5, 0.5, d) * np.log(c))
    ev = ev / np.sqrt(ev.min() * ev.max())  # center the spectrum around 1
    return (Q * ev) @ Q.conj().T


def random_weight(rng, kinds=None, d_choices=(1, 2)):
    kinds = kinds or ("constant", "scalar_exp", "scalar_power", "rotating",
                      "checkerboard")
    kind = kinds[rng.integers(len(kinds))]
    d = int(d_choices[rng.integers(len(d_choices))])
    if kind == "constant":
        return WeightSpec.constant(random_pd(rng, d))
    if kind == "scalar_exp":
        return WeightSpec.scalar_exp(rng.uniform(-2.0, 2.0), d=d)
    if kind == "scalar_power":
        return WeightSpec.scalar_power(rng.uniform(0.0, 4.0), d=d)
    if kind == "rotating":
        lam = np.exp(rng.uniform(0.0, np.log(10.0), 2))
        return WeightSpec.rotating(lam[0], lam[1], rng.uniform(0.0, np.pi))
    return WeightSpec.checkerboard(random_pd(rng, d), random_pd(rng, d),
                                  rng.uniform(0.25, 1.0))


def random_unit(rng, d):
    x = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return x / np.linalg.norm(x)


def _case_rngs(seed, size):
    return [np.random.default_rng(s) for s in
            np.random.SeedSequence(seed).spawn(size)]


def _fail(case, spec, **kv):
    rec = {"case": case, "weight": spec.to_json_dict() if spec else None}
    rec.update({k: (float(v) if isinstance(v, (int, float, np.floating))
                    else v) for k, v in kv.items()})
    return rec


# -- individual suites -------------------------------------------------------


def _suite_duality(rngs, resolution):
    tol = 1e-6
    failures = []
    for i, rng in enumerate(rngs):
        try:
            spec = random_weight(rng)
            p = float(rng.choice([1.0, 1.5, 2.0, 3.0]))
            Q = Cube(real_to_point(rng.uniform(-1, 1, 2)), rng.uniform(0.5, 1.5))
            x = random_unit(rng, spec.d)
            lhs = dual_pointwise_avg(spec, p, Q, resolution, check_tol=None)(x)
            rhs = dual_norm(avg_norm(spec, p, Q, resolution, check_tol=None), x,
                            seed=int(rng.integers(1 << 31)))
            if not lhs >= rhs - tol:
                failures.append(_fail(i, spec, p=p, x=list(x), lhs=lhs, rhs=rhs))
        except FockAprError as exc:
            failures.append(_fail(i, None, error=str(exc)))
    return {"duality_slack": tol}, failures


def _suite_sandwich(rngs, resolution):
    tols = {"cert_low": 1e-4, "bracket_slack": 0.05}
    failures = []
    for i, rng in enumerate(rngs):
        try:
            spec = random_weight(rng)
            p = float(rng.choice([1.0, 1.5, 2.0, 3.0]))
            r = rng.uniform(0.5, 1.5)
            Q = Cube(real_to_point(rng.uniform(-1, 1, 2)), r)
            rho = avg_norm(spec, p, Q, resolution, check_tol=None)
            R = reducing_operator(rho, seed=int(rng.integers(1 << 31)))
            sd = np.sqrt(spec.d)
            if not (R.lower_ratio >= 1 - 1e-4 and R.upper_ratio <= sd + 1e-4):
                failures.append(_fail(i, spec, p=p, lo=R.lower_ratio,
                                      hi=R.upper_ratio))
                continue
            if i % 5 == 0:
                rep = apr_constant(spec, p, r, region_halfwidth=max(2.5, 2 * r),
                                   lattice_step=r, resolution=resolution,
                                   seed=int(rng.integers(1 << 31)))
                lo, hi = rep.apr_interval
                if not (lo * 0.95 <= rep.apr_direct <= hi * 1.05):
                    failures.append(_fail(i, spec, p=p, direct=rep.apr_direct,
                                          interval=[lo, hi]))
        except FockAprError as exc:
            failures.append(_fail(i, None, error=str(exc)))
    return tols, failures


def _suite_threeQ(rngs, resolution):
    tol = 1e-3
    failures = []
    for i, rng in enumerate(rngs):
        try:
            spec = random_weight(rng)
            p = float(rng.choice([1.0, 1.5, 2.0, 3.0]))
            r = rng.uniform(0.5, 1.0)
            Q = Cube(real_to_point(rng.uniform(-1, 1, 2)), r)
            x = random_unit(rng, spec.d)
            lhs, rhs, ok = check_3Q(spec, p, r, Q, x, resolution=resolution)
            if not (lhs <= rhs * (1 + tol)):
                failures.append(_fail(i, spec, p=p, x=list(x), lhs=lhs, rhs=rhs))
        except FockAprError as exc:
            failures.append(_fail(i, None, error=str(exc)))
    return {"threeQ_slack": tol}, failures


def _suite_lattice(rngs, resolution):
    tol = 1e-3
    failures = []
    for i, rng in enumerate(rngs):
        try:
            # pure path invariants, n in {1, 2}
            n = int(rng.integers(1, 3))
            r = rng.uniform(0.25, 1.0)
            a = rng.integers(-4, 5, 2 * n) * r
            b = rng.integers(-4, 5, 2 * n) * r
            try:
                discrete_path(a, b, r).validate()
            except Exception as exc:
                failures.append(_fail(i, None, kind="path", err=str(exc)))
                continue
            spec = random_weight(rng)
            p = float(rng.choice([1.0, 1.5, 2.0, 3.0]))
            r = rng.uniform(0.5, 1.0)
            nu = rng.integers(-2, 3, 2) * r
            nup = rng.integers(-2, 3, 2) * r
            x = random_unit(rng, spec.d)
            a3 = apr_constant(spec, p, 3 * r, region_halfwidth=max(2.0, 6 * r),
                              resolution=resolution, with_sandwich=False,
                              seed=int(rng.integers(1 << 31))).apr_direct
            res = check_lattice_comparison(spec, p, r, nu, nup, x, a3,
                                           resolution=resolution,
                                           seed=int(rng.integers(1 << 31)))
            if not (res["pass"] and res["op_pass"]):
                failures.append(_fail(i, spec, p=p, nu=list(nu), nup=list(nup),
                                      lhs=res["lhs"], log_rhs=res["log_rhs"],
                                      op_lhs=res["op_lhs"],
                                      log_op_rhs=res["log_op_rhs"]))
        except FockAprError as exc:
            failures.append(_fail(i, None, error=str(exc)))
    return {"lattice_slack": tol}, failures


def _suite_localization(rngs, resolution, alpha=1.0, h=0.2):
    tol = 1e-2
    failures = []
    grid = QuadratureGrid(alpha, n=1, h=h)
    for i, rng in enumerate(rngs):
        try:
            spec = random_weight(rng)
            r = rng.uniform(0.5, 1.5)
            u = real_to_point(rng.uniform(-1, 1, 2))
            lhs, rhs, ok = localization_bound_check(spec, 2, alpha, u, r, grid)
            if not ok:
                failures.append(_fail(i, spec, r=r, u=str(u), lhs=lhs, rhs=rhs))
                continue
            # eigen-relation of the localized projection on its own test bump
            x = random_unit(rng, spec.d)
            k = normalized_kernel_values(alpha, u, grid.nodes)
            mask = grid.cube_mask(Cube(u, r))
            f = GridFunction(grid, np.where(mask, k, 0.0)[:, None] * x[None, :])
            out = apply_localized(alpha, u, r, f)
            wq = (alpha / np.pi) ** grid.n * grid.cell_measure
            c_grid = wq * float((grid.half_gauss[mask] ** 2
                                 * np.abs(k[mask]) ** 2).sum())
            err = np.abs(out.values - c_grid * f.values).max() / c_grid
            if err > 1e-6:
                failures.append(_fail(i, spec, r=r, u=str(u), eigen_err=err))
        except FockAprError as exc:
            failures.append(_fail(i, None, error=str(exc)))
    return {"bound_slack": tol, "eigen_rel": 1e-6}, failures


def _suite_radii(rngs, resolution):
    tol = 1e-3
    failures = []
    for i, rng in enumerate(rngs):
        try:
            spec = random_weight(rng)
            p = float(rng.choice([1.0, 1.5, 2.0, 3.0]))
            r1 = rng.uniform(0.4, 1.0)
            r2 = r1 * rng.uniform(1.2, 2.5)
            res = compare_radii(spec, p, r1, r2, region_halfwidth=2.0,
                                resolution=resolution,
                                seed=int(rng.integers(1 << 31)))
            if not (res.pass_lower and res.upper_ok):
                failures.append(_fail(i, spec, p=p, r1=r1, r2=r2,
                                      apr_r1=res.apr_r1, apr_r2=res.apr_r2,
                                      upper=res.explicit_upper))
        except FockAprError as exc:
            failures.append(_fail(i, None, error=str(exc)))
    return {"radii_slack": tol}, failures


def _suite_theorem(rngs, resolution, alpha=1.0, r=1.0, h=0.2):
    slack = 1.02
    failures = []
    grid = QuadratureGrid(alpha, n=1, h=h)
    for i, rng in enumerate(rngs):
        try:
            spec = random_weight(rng, kinds=("constant", "scalar_exp"))
            apr = apr_constant(spec, 2.0, r, resolution=resolution,
                               with_sandwich=False,
                               seed=int(rng.integers(1 << 31))).apr_direct
            lower = theorem_lower_bound(max(apr, 1.0), alpha, 2.0, r, 1)
            exact = projection_norm_p2(spec, alpha, grid,
                                       seed=int(rng.integers(1 << 31)))
            upper = maximal_upper_bound(spec, 2.0, alpha, r,
                                        resolution=resolution,
                                        seed=int(rng.integers(1 << 31)))
            if not (lower <= exact * slack and exact <= upper * slack):
                failures.append(_fail(i, spec, lower=lower, exact=exact,
                                      upper=upper))
        except FockAprError as exc:
            failures.append(_fail(i, None, error=str(exc)))
    return {"chain_slack": slack}, failures


_SUITE_FNS = {
    "duality": _suite_duality,
    "sandwich": _suite_sandwich,
    "threeQ": _suite_threeQ,
    "lattice": _suite_lattice,
    "localization": _suite_localization,
    "radii": _suite_radii,
    "theorem": _suite_theorem,
}

DEFAULT_SIZES = {
    "duality": 50, "sandwich": 25, "threeQ": 25, "lattice": 15,
    "localization": 5, "radii": 10, "theorem": 3,
}


def run_suite(name, seed=42, size=None, resolution=12, threads=1):
    """Run one named suite; deterministic given (seed, size) at any thread
    count (cases are generated up front and merged in case order)."""
    if name not in _SUITE_FNS:
        raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
    if size is None:
        size = DEFAULT_SIZES[name]
    t0 = time.perf_counter()
    rngs = _case_rngs(seed, size)
    fn = _SUITE_FNS[name]
    if threads and threads > 1 and size > 1:
        # deterministic contiguous blocks of pre-spawned case generators,
        # merged back in case order
        blocks = np.array_split(np.arange(size), min(threads, size))

        def run_block(idx):
            tols, fails = fn([rngs[i] for i in idx], resolution)
            for f in fails:
                f["case"] = int(idx[f["case"]])
            return tols, fails

        with ThreadPoolExecutor(max_workers=len(blocks)) as ex:
            results = list(ex.map(run_block, blocks))
        tols = results[0][0]
        failures = [f for _, fl in results for f in fl]
        failures.sort(key=lambda rec: rec["case"])
    else:
        tols, failures = fn(rngs, resolution)
    return SuiteReport(name, size, tols, failures,
                       time.perf_counter() - t0)


def run_all(seed=42, sizes=None, resolution=12, threads=1):
    """Run every suite; returns reports in fixed suite order."""
    out = []
    for name in SUITES:
        size = None if sizes is None else sizes.get(name)
        out.append(run_suite(name, seed=seed, size=size,
                             resolution=resolution, threads=threads))
    return out
