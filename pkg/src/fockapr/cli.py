"""Command-line entry point: weight ingestion, command dispatch, and
CSV/JSON/SVG emission.

Exit codes: 0 success, 1 usage/parse error, 2 numerical-region warning,
3 verification failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from .apr import apr_constant
from .errors import FockAprError, InvalidSpec, RegionTooSmall
from .fockop import (QuadratureGrid, maximal_upper_bound,
                     projection_norm_lower, projection_norm_p2,
                     theorem_lower_bound)
from .linalg import WeightSpec
from .verify import SUITES, run_all, run_suite

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_REGION = 2
EXIT_VERIFY = 3


@dataclass
class RunConfig:
    command: str
    weight_path: str = None
    p: float = 2.0
    alpha: float = 1.0
    r: float = 1.0
    region: float = 2.0
    step: float = None
    resolution: int = 16
    seed: int = 42
    out: str = "."
    threads: int = None
    suite: str = None
    fail_fixture: bool = False

    def validate(self):
        if self.p < 1:
            raise InvalidSpec("p must be >= 1")
        if self.alpha <= 0:
            raise InvalidSpec("alpha must be positive")
        if self.r <= 0:
            raise InvalidSpec("r must be positive")
        if self.resolution < 4:
            raise InvalidSpec("resolution must be >= 4")
        return self


def load_weight(path):
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise InvalidSpec(f"cannot read weight file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidSpec(f"weight file is not valid JSON: {exc}") from exc
    for key in ("kind", "d", "n"):
        if key not in obj:
            raise InvalidSpec(f"weight spec is missing required field {key!r}")
    return WeightSpec.from_json_dict(obj)


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_apr(cfg):
    spec = load_weight(cfg.weight_path)
    try:
        rep = apr_constant(spec, cfg.p, cfg.r, region_halfwidth=cfg.region,
                           lattice_step=cfg.step, resolution=cfg.resolution,
                           seed=cfg.seed)
    except RegionTooSmall as exc:
        print(f"region warning: {exc}", file=sys.stderr)
        return EXIT_REGION
    os.makedirs(cfg.out, exist_ok=True)
    rep.write_csv(os.path.join(cfg.out, "apr_cubes.csv"))
    rep.write_json(os.path.join(cfg.out, "apr_summary.json"))
    print(f"apr_direct = {rep.apr_direct:.17g}")
    print(f"sandwich interval = [{rep.apr_interval[0]:.17g}, "
          f"{rep.apr_interval[1]:.17g}]")
    return EXIT_OK


def cmd_projnorm(cfg):
    spec = load_weight(cfg.weight_path)
    if spec.n != 1:
        raise InvalidSpec("projnorm supports n = 1")
    grid = QuadratureGrid(cfg.alpha, n=1,
                          T=max(6.0 / np.sqrt(cfg.alpha), 2 * cfg.region),
                          h=min(0.1, cfg.r / 10.0))
    apr = apr_constant(spec, cfg.p, cfg.r, region_halfwidth=cfg.region,
                       resolution=cfg.resolution, seed=cfg.seed,
                       with_sandwich=False).apr_direct
    lower_formula = theorem_lower_bound(max(apr, 1.0), cfg.alpha, cfg.p,
                                        cfg.r, spec.n)
    centers = [np.zeros(1, dtype=complex), np.array([0.5 + 0.5j])]
    lower_est = projection_norm_lower(spec, cfg.p, cfg.alpha, cfg.r, grid,
                                      centers, seed=cfg.seed)
    upper = maximal_upper_bound(spec, cfg.p, cfg.alpha, cfg.r,
                                region_halfwidth=cfg.region,
                                resolution=cfg.resolution, seed=cfg.seed)
    table = {
        "p": cfg.p, "alpha": cfg.alpha, "r": cfg.r,
        "apr_direct": apr,
        "lower_bound_formula": lower_formula,
        "lower_estimate": lower_est,
        "constructive_upper": upper,
    }
    if cfg.p == 2:
        table["exact_p2"] = projection_norm_p2(spec, cfg.alpha, grid,
                                               seed=cfg.seed)
    os.makedirs(cfg.out, exist_ok=True)
    _write_json(os.path.join(cfg.out, "projnorm.json"), table)
    cols = ["lower_bound_formula", "lower_estimate"]
    if cfg.p == 2:
        cols.append("exact_p2")
    cols.append("constructive_upper")
    for c in cols:
        print(f"{c} = {table[c]:.17g}")
    return EXIT_OK


def cmd_verify(cfg):
    os.makedirs(cfg.out, exist_ok=True)
    if cfg.fail_fixture:
        # deliberate zero-tolerance fixture exercising the failure path
        rep = run_suite("duality", seed=cfg.seed, size=1,
                        resolution=cfg.resolution)
        rep.failures.append({"case": 0, "weight": None,
                             "note": "forced-failure fixture (tolerance 0)"})
        reports = [rep]
    elif cfg.suite:
        if cfg.suite not in SUITES:
            print(f"unknown suite {cfg.suite!r}; choose from {SUITES}",
                  file=sys.stderr)
            return EXIT_USAGE
        reports = [run_suite(cfg.suite, seed=cfg.seed,
                             resolution=cfg.resolution, threads=cfg.threads)]
    else:
        reports = run_all(seed=cfg.seed, resolution=cfg.resolution,
                          threads=cfg.threads)
    for rep in reports:
        with open(os.path.join(cfg.out, f"suite_{rep.suite}.json"), "w") as fh:
            fh.write(rep.to_json_text())
        print(rep.to_text())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFY


def cmd_plot(cfg):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = os.path.join(cfg.out, "apr_cubes.csv")
    if not os.path.exists(path):
        print(f"missing CSV: {path}", file=sys.stderr)
        return EXIT_USAGE
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        print(f"empty CSV: {path} has no data rows", file=sys.stderr)
        return EXIT_USAGE
    xs = np.array([float(r["center_x1"]) for r in rows])
    ys = np.array([float(r["center_y1"]) for r in rows])
    vals = np.array([float(r["direct_ratio"]) for r in rows])
    fig, ax = plt.subplots(figsize=(5, 4))
    sc = ax.scatter(xs, ys, c=vals, s=80, marker="s", cmap="viridis")
    fig.colorbar(sc, ax=ax, label="direct ratio")
    ax.set_xlabel("Re center")
    ax.set_ylabel("Im center")
    ax.set_title("per-cube restricted constant")
    heat = os.path.join(cfg.out, "apr_heatmap.svg")
    fig.savefig(heat)
    plt.close(fig)
    print(f"wrote {heat}")

    conv = os.path.join(cfg.out, "norms.csv")
    if os.path.exists(conv):
        with open(conv, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if rows:
            res = [float(r["resolution"]) for r in rows]
            nrm = [float(r["norm"]) for r in rows]
            fig, ax = plt.subplots(figsize=(5, 4))
            ax.plot(res, nrm, "o-")
            ax.set_xlabel("resolution")
            ax.set_ylabel("norm")
            ax.set_title("norm vs resolution")
            out = os.path.join(cfg.out, "norm_convergence.svg")
            fig.savefig(out)
            plt.close(fig)
            print(f"wrote {out}")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(
        prog="fockapr",
        description="Restricted matrix Muckenhoupt constants and "
                    "discretized Fock projections")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("apr", "projnorm", "verify", "plot"):
        sp = sub.add_parser(name)
        sp.add_argument("--weight", dest="weight_path")
        sp.add_argument("--p", type=float, default=2.0)
        sp.add_argument("--alpha", type=float, default=1.0)
        sp.add_argument("--r", type=float, default=1.0)
        sp.add_argument("--region", type=float, default=2.0)
        sp.add_argument("--step", type=float, default=None)
        sp.add_argument("--resolution", type=int, default=16)
        sp.add_argument("--seed", type=int, default=42)
        sp.add_argument("--out", default=".")
        sp.add_argument("--threads", type=int,
                        default=os.cpu_count() or 1)
        if name == "verify":
            sp.add_argument("--suite", default=None)
            sp.add_argument("--fail-fixture", action="store_true",
                            dest="fail_fixture")
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    cfg = RunConfig(
        command=ns.command, weight_path=ns.weight_path, p=ns.p,
        alpha=ns.alpha, r=ns.r, region=ns.region, step=ns.step,
        resolution=ns.resolution, seed=ns.seed, out=ns.out,
        threads=ns.threads, suite=getattr(ns, "suite", None),
        fail_fixture=getattr(ns, "fail_fixture", False))
    try:
        cfg.validate()
        if cfg.command in ("apr", "projnorm") and not cfg.weight_path:
            raise InvalidSpec("--weight is required for this command")
        handler = {"apr": cmd_apr, "projnorm": cmd_projnorm,
                   "verify": cmd_verify, "plot": cmd_plot}[cfg.command]
        return handler(cfg)
    except InvalidSpec as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RegionTooSmall as exc:
        print(f"region warning: {exc}", file=sys.stderr)
        return EXIT_REGION
    except FockAprError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
