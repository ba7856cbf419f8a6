"""Gaussian quadrature grids, the reproducing kernel, and the discretized
projection operators with their norm estimators and explicit bounds.

For n = 1 the symmetrized kernel matrix S0[z, u] ~ e^{-a/2|z-u|^2 + i phase}
factorizes along the four real axes, so a matrix-vector product costs
O(m^3) instead of O(m^4) and the dense m^2 x m^2 matrix is never formed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .errors import (CubeOutsideGrid, InvalidSpec, OverflowGuard,
                     PowerIterationStall, SeriesDiverging)
from .linalg import as_point, matrix_power, weight_at_points
from .metric import Cube, avg_norm, sphere_sample
from .reduce import reducing_operator

TAIL_TOL = 1e-10
EXP_GUARD = 700.0
POWER_TOL = 1e-8
POWER_MAX_ITER = 10_000
SERIES_TRUNC = 1e-12


class QuadratureGrid:
    """Tensor midpoint grid of step h on [-T, T]^{2n} with Gaussian weights.

    The truncation halfwidth must satisfy the tail bound
    (alpha/pi)^n * integral outside the box of e^{-alpha|u|^2} < tail_tol.
    """

    def __init__(self, alpha, n=1, T=None, h=0.1, tail_tol=TAIL_TOL,
                 margin=1.0):
        if alpha <= 0:
            raise InvalidSpec("alpha must be positive")
        self.alpha = float(alpha)
        self.n = int(n)
        self.tail_tol = float(tail_tol)
        T_req = np.sqrt(np.log(1.0 / tail_tol) / alpha) + margin
        if T is None:
            T = max(6.0 / np.sqrt(alpha), T_req)
        if T < T_req:
            raise InvalidSpec(
                f"truncation halfwidth {T} violates the tail bound; "
                f"need T >= {T_req:.3f}")
        m = int(np.ceil(2.0 * T / h))
        self.h = float(h)
        self.T = m * h / 2.0  # snap outward so the box is a whole cell count
        self.m = m
        self.axis = -self.T + h * (np.arange(m) + 0.5)
        grids = np.meshgrid(*([self.axis] * (2 * self.n)), indexing="ij")
        coords = np.stack([g.ravel() for g in grids], axis=-1)
        self.real_coords = coords
        self.nodes = coords[:, 0::2] + 1j * coords[:, 1::2]
        self.cell_measure = self.h ** (2 * self.n)
        tail = 1.0 - erf(np.sqrt(alpha) * self.T) ** (2 * self.n)
        if tail >= tail_tol:
            raise InvalidSpec("tail bound violated after snapping")
        # Gaussian half-weights e^{-alpha/2 |z|^2} shared by all operators
        self.half_gauss = np.exp(-0.5 * alpha * (np.abs(self.nodes) ** 2).sum(axis=1))
        self._fact = None

    @property
    def node_count(self):
        return self.nodes.shape[0]

    # -- structured symmetrized kernel (n = 1) -----------------------------

    def _factors(self):
        if self._fact is None:
            a, x = self.alpha, self.axis
            A = np.exp(-0.5 * a * (x[:, None] - x[None, :]) ** 2)
            C = np.exp(1j * a * np.outer(x, x))
            self._fact = (A, C, C.conj())
        return self._fact

    def s0_matvec(self, v):
        """v -> S0 v for the Hermitian symmetrized kernel matrix
        S0[z,u] = (alpha/pi) h^2 e^{alpha u conj(z) - alpha/2(|u|^2+|z|^2)}.

        n = 1 only; v has node ordering (ix * m + iy).
        """
        if self.n != 1:
            raise InvalidSpec("structured matvec requires n = 1")
        A, C, D = self._factors()
        m = self.m
        V = np.asarray(v, dtype=complex).reshape(m, m)
        BC = A[:, None, :] * C[None, :, :]                    # (y, x, b)
        t = (BC.reshape(m * m, m) @ V.T).reshape(m, m, m)     # (y, x, a)
        out = np.einsum("xa,ya,yxa->xy", A, D, t)
        return out.ravel() * (self.alpha / np.pi) * self.h * self.h

    def s0_conj_matvec(self, v):
        """v -> conj(S0) v, the matrix with e^{alpha z conj(u)} instead."""
        return self.s0_matvec(np.conj(v)).conj()

    def cube_mask(self, cube):
        """Boolean mask of nodes strictly inside the cube; requires the cube
        to sit inside the grid box."""
        lo = np.empty(2 * self.n)
        lo[0::2] = cube.center.real - cube.side / 2
        lo[1::2] = cube.center.imag - cube.side / 2
        hi = lo + cube.side
        if lo.min() < -self.T - 1e-12 or hi.max() > self.T + 1e-12:
            raise CubeOutsideGrid(
                f"cube [{lo.min():.2f}, {hi.max():.2f}] exceeds the grid box "
                f"[-{self.T:.2f}, {self.T:.2f}]")
        c = self.real_coords
        return np.all((c > lo[None, :]) & (c < hi[None, :]), axis=1)


@dataclass
class GridFunction:
    """C^d-valued (or scalar) samples on the nodes of a grid."""

    grid: QuadratureGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != self.grid.node_count:
            raise InvalidSpec("value count does not match node count")
        if not np.all(np.isfinite(v)):
            raise InvalidSpec("grid function has non-finite entries")
        self.values = v.astype(complex)

    @property
    def d(self):
        return self.values.shape[1]


def kernel(alpha, z, u):
    """The reproducing kernel K^alpha_z(u) = e^{alpha <u, z>} with
    <u, z> = sum_i u_i conj(z_i)."""
    z = as_point(z)
    u = as_point(u)
    if alpha * np.linalg.norm(u) * np.linalg.norm(z) > EXP_GUARD:
        raise OverflowGuard("kernel exponent exceeds the double range")
    return complex(np.exp(alpha * np.sum(u * np.conj(z))))


def normalized_kernel_values(alpha, u_center, nodes):
    """k^alpha_u(z) = e^{alpha <z, u> - alpha/2 |u|^2} at a batch of nodes."""
    u = as_point(u_center)
    ip = nodes @ np.conj(u)
    return np.exp(alpha * ip - 0.5 * alpha * np.sum(np.abs(u) ** 2))


def apply_projection(alpha, f):
    """P_alpha f(z) = (alpha/pi)^n sum_u f(u) e^{alpha <z,u>} e^{-alpha|u|^2} h^{2n},
    evaluated at every node, componentwise over C^d."""
    g = f.grid
    if abs(alpha - g.alpha) > 1e-14:
        raise InvalidSpec("alpha does not match the grid")
    out = np.empty_like(f.values)
    if g.n == 1:
        # P f = e^{alpha/2|z|^2} conj(S0) (f e^{-alpha/2|u|^2})
        boost = np.exp(0.5 * alpha * (np.abs(g.nodes) ** 2).sum(axis=1))
        for j in range(f.d):
            v = f.values[:, j] * g.half_gauss
            out[:, j] = boost * g.s0_conj_matvec(v)
        return GridFunction(g, out)
    scale = (alpha / np.pi) ** g.n * g.cell_measure
    w = g.half_gauss ** 2
    chunk = max(1, 10_000_000 // max(g.node_count, 1))
    for s in range(0, g.node_count, chunk):
        zc = g.nodes[s:s + chunk]
        K = np.exp(alpha * (zc @ g.nodes.conj().T))
        out[s:s + chunk] = scale * (K @ (f.values * w[:, None]))
    return GridFunction(g, out)


def apply_maximal(spec, p, alpha, f):
    """The maximal operator: z -> integral of
    |W^{1/p}(z) W^{-1/p}(u) f(u)| |K^alpha_z(u)| dlambda_alpha(u).

    Returns a scalar GridFunction.  Scalar-like and constant weights use the
    separable Gaussian-difference kernel; matrix weights go through a
    chunked dense path.
    """
    g = f.grid
    scalar_like = spec.d == 1 or spec.kind in ("scalar_exp", "scalar_power")
    boost = 1.0 / g.half_gauss

    if spec.kind == "constant" or scalar_like:
        if scalar_like and spec.d >= 1:
            w = weight_at_points(spec, g.nodes)[:, 0, 0].real
            wz = w ** (1.0 / p)
            vu = np.linalg.norm(f.values, axis=1) / wz
        else:
            # constant weight: W^{1/p}(z) W^{-1/p}(u) = I exactly
            wz = np.ones(g.node_count)
            vu = np.linalg.norm(f.values, axis=1)
        v = vu * g.half_gauss
        if g.n == 1:
            m = g.m
            A = g._factors()[0]
            res = (A @ (A @ v.reshape(m, m).T).T).ravel()
            res *= (alpha / np.pi) * g.cell_measure
        else:
            res = _gauss_diff_matvec(g, v)
        return GridFunction(g, wz * boost * res)

    y = np.einsum("nij,nj->ni", matrix_power(weight_at_points(spec, g.nodes),
                                             -1.0 / p), f.values)
    y = y * g.half_gauss[:, None]
    out = np.empty(g.node_count)
    scale = (alpha / np.pi) ** g.n * g.cell_measure
    chunk = max(1, 5_000_000 // max(g.node_count, 1))
    for s in range(0, g.node_count, chunk):
        zc = g.nodes[s:s + chunk]
        Wz = matrix_power(weight_at_points(spec, zc), 1.0 / p)
        nr = np.linalg.norm(np.einsum("cij,uj->cui", Wz, y), axis=-1)
        diff = (np.abs(zc[:, None, :] - g.nodes[None, :, :]) ** 2).sum(axis=-1)
        out[s:s + chunk] = (nr * np.exp(-0.5 * alpha * diff)).sum(axis=1)
    return GridFunction(g, scale * boost * out)


def _gauss_diff_matvec(g, v):
    """v -> sum_u e^{-alpha/2 |z-u|^2} v(u) * (alpha/pi)^n h^{2n} (dense)."""
    diff = (np.abs(g.nodes[:, None, :] - g.nodes[None, :, :]) ** 2).sum(axis=-1)
    return (np.exp(-0.5 * g.alpha * diff) @ v) \
        * (g.alpha / np.pi) ** g.n * g.cell_measure


def localization_eigenvalue(alpha, r, n):
    """c_{alpha,u,r} = (alpha/pi)^n int_{Q_r} e^{-alpha|z|^2} dv
    = erf(sqrt(alpha) r / 2)^{2n}."""
    return float(erf(np.sqrt(alpha) * r / 2.0) ** (2 * n))


def apply_localized(alpha, u_center, r, f):
    """P_{alpha,u,r} f = chi_Q k^alpha_u * int_Q f conj(k^alpha_u) dlambda."""
    g = f.grid
    u = as_point(u_center, g.n)
    mask = g.cube_mask(Cube(u, r))
    k = normalized_kernel_values(alpha, u, g.nodes)
    wq = (alpha / np.pi) ** g.n * g.cell_measure * (g.half_gauss[mask] ** 2)
    coeff = (f.values[mask] * (np.conj(k[mask]) * wq)[:, None]).sum(axis=0)
    out = np.zeros_like(f.values)
    out[mask] = k[mask][:, None] * coeff[None, :]
    return GridFunction(g, out)


def weighted_lp_norm(spec, p, alpha, f):
    """The L^p_{alpha,W} norm by grid quadrature.

    Finite p: [ (p alpha / 2 pi)^n h^{2n} sum |W^{1/p} f|^p e^{-p alpha/2 |z|^2} ]^{1/p}.
    p = inf: sup |W(z) f(z)| e^{-alpha/2 |z|^2}.
    """
    g = f.grid
    if p == np.inf:
        Wf = np.einsum("nij,nj->ni", weight_at_points(spec, g.nodes), f.values)
        return float((np.linalg.norm(Wf, axis=1) * g.half_gauss).max())
    if p < 1:
        raise ValueError("p must be >= 1")
    Wf = np.einsum("nij,nj->ni",
                   matrix_power(weight_at_points(spec, g.nodes), 1.0 / p),
                   f.values)
    vals = np.linalg.norm(Wf, axis=1) * g.half_gauss
    acc = (vals ** p).sum() * (p * alpha / (2 * np.pi)) ** g.n * g.cell_measure
    return float(acc ** (1.0 / p))


# -- operator norms ---------------------------------------------------------


def _weighted_p2_matvecs(spec, grid):
    """Matvec callables for T and T^H where T is the discretized projection
    conjugated into unweighted ell^2 coordinates:
    T = W^{1/2}(z) conj(S0)[z,u] W^{-1/2}(u)."""
    d = spec.d
    if spec.kind == "constant":
        Wh = Whi = None  # similarity by a constant matrix drops out
    else:
        W = weight_at_points(spec, grid.nodes)
        Wh = matrix_power(W, 0.5)
        Whi = matrix_power(W, -0.5)

    def mul(mats, v):
        if mats is None:
            return v
        return np.einsum("nij,nj->ni", mats, v)

    def s0c(v):
        out = np.empty_like(v)
        for j in range(v.shape[1]):
            out[:, j] = grid.s0_conj_matvec(v[:, j])
        return out

    def T(v):
        return mul(Wh, s0c(mul(Whi, v)))

    def TH(v):
        # conj(S0) is Hermitian, W powers are Hermitian
        return mul(Whi, s0c(mul(Wh, v)))

    return T, TH, d


def _lanczos_lambda_max(aps, x, tol, max_iter, stable_steps=3, max_dim=300):
    """Largest eigenvalue of the Hermitian PSD operator `aps` by Lanczos
    with full reorthogonalization, stopping when the top Ritz value is
    stable to `tol` over several consecutive steps.  The estimate converges
    from below (Rayleigh-Ritz)."""
    basis = [x]
    alphas, betas = [], []
    lam_prev, stable = -np.inf, 0
    for j in range(min(max_dim, max_iter)):
        w = aps(basis[-1])
        a = float(np.real(np.vdot(basis[-1], w)))
        alphas.append(a)
        for b in basis:  # full reorthogonalization
            w = w - np.vdot(b, w) * b
        for b in basis:
            w = w - np.vdot(b, w) * b
        nb = np.linalg.norm(w)
        Tm = np.diag(alphas) + np.diag(betas, 1) + np.diag(betas, -1)
        lam = float(np.linalg.eigvalsh(Tm)[-1])
        if nb < 1e-14:  # invariant subspace found: exact within it
            return lam
        if abs(lam - lam_prev) <= tol * max(abs(lam), 1.0):
            stable += 1
            if stable >= stable_steps:
                return lam
        else:
            stable = 0
        lam_prev = lam
        betas.append(nb)
        basis.append(w / nb)
    raise PowerIterationStall(
        f"Lanczos Ritz value not stable to {tol} within the step cap")


def projection_norm_p2(spec, alpha, grid, tol=POWER_TOL,
                       max_iter=POWER_MAX_ITER, seed=0, method="lanczos"):
    """Largest singular value of the discretized weighted projection at p=2.

    Iterates on T^H T from a deterministic start vector.  The default uses
    Krylov (Lanczos) acceleration of the power sequence, which converges in
    tens of matvecs even when the top of the spectrum is clustered; plain
    power iteration is available via method="power".
    """
    if grid.n != 1:
        raise InvalidSpec("p=2 norm implemented for n = 1 grids")
    T, TH, d = _weighted_p2_matvecs(spec, grid)
    rng = np.random.default_rng(seed)
    N = grid.node_count * d
    x = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    x /= np.linalg.norm(x)

    def aps(v):
        u = v.reshape(grid.node_count, d)
        return TH(T(u)).ravel()

    if method == "lanczos":
        return float(np.sqrt(max(_lanczos_lambda_max(aps, x, tol, max_iter), 0.0)))

    lam = 0.0
    for _ in range(max_iter):
        y = aps(x)
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0
        new = float(np.real(np.vdot(x, y)))
        x = y / ny
        if abs(new - lam) <= tol * max(new, 1.0):
            return float(np.sqrt(max(new, 0.0)))
        lam = new
    raise PowerIterationStall(
        f"power iteration did not reach tol {tol} in {max_iter} iterations")


def localized_norm_p2(spec, alpha, u_center, r, grid):
    """Exact discretized norm of P_{alpha,u,r} on L^2_{alpha,W}.

    The operator has rank <= d; in unweighted coordinates it is A B^H with
    A, B determined by chi_Q k_u, so the norm is the square root of the
    largest eigenvalue of (sum_Q s^2 |k_u|^2 W) (sum_Q s^2 |k_u|^2 W^{-1}).
    """
    u = as_point(u_center, grid.n)
    mask = grid.cube_mask(Cube(u, r))
    k = normalized_kernel_values(alpha, u, grid.nodes)[mask]
    s2 = (alpha / np.pi) ** grid.n * grid.cell_measure \
        * (grid.half_gauss[mask] ** 2) * np.abs(k) ** 2
    W = weight_at_points(spec, grid.nodes[mask])
    M1 = np.einsum("q,qij->ij", s2, W)
    M2 = np.einsum("q,qij->ij", s2, matrix_power(W, -1.0))
    ev = np.linalg.eigvals(M1 @ M2)
    return float(np.sqrt(max(ev.real.max(), 0.0)))


def projection_norm_lower(spec, p, alpha, r, grid, test_centers,
                          directions=8, random_tests=8, seed=0):
    """Certified lower bound for the discretized operator norm at any p.

    Maximizes ||P f|| / ||f|| over localized kernel bumps chi_Q k_u x, plain
    kernels k_u x, and a seeded random family of kernel combinations.
    """
    d = spec.d
    X = sphere_sample(d, directions, seed=seed)
    best = 0.0
    cache = {}

    def ratio(f):
        nf = weighted_lp_norm(spec, p, alpha, f)
        if nf < 1e-300:
            return 0.0
        return weighted_lp_norm(spec, p, alpha, apply_projection(alpha, f)) / nf

    for u in test_centers:
        u = as_point(u, grid.n)
        k = normalized_kernel_values(alpha, u, grid.nodes)
        mask = grid.cube_mask(Cube(u, r))
        cache[tuple(u)] = k
        for x in X:
            chi = np.where(mask, k, 0.0)[:, None] * x[None, :]
            best = max(best, ratio(GridFunction(grid, chi)))
            best = max(best, ratio(GridFunction(grid, k[:, None] * x[None, :])))

    rng = np.random.default_rng(seed + 1)
    ks = list(cache.values())
    for _ in range(random_tests):
        coeffs = rng.standard_normal((len(ks), d)) \
            + 1j * rng.standard_normal((len(ks), d))
        v = sum(k[:, None] * c[None, :] for k, c in zip(ks, coeffs))
        best = max(best, ratio(GridFunction(grid, v)))
    return float(best)


def theorem_lower_bound(apr, alpha, p, r, n):
    """(alpha r^2 / pi)^n e^{-n alpha r^2} sqrt(apr) <= ||P_alpha||."""
    if apr < 1:
        raise ValueError("apr must be >= 1")
    return float((alpha * r * r / np.pi) ** n * np.exp(-n * alpha * r * r)
                 * np.sqrt(apr))


def _lattice_gaussian_sum(alpha, r, n, log_c3, trunc=SERIES_TRUNC,
                          max_shell=2000):
    """K = sum over m in Z^{2n} of e^{-alpha r^2 |m|^2 / 4 + sqrt(2n)|m| log_c3},
    summed by sup-norm shells with divergence detection."""
    total = 0.0
    growth = 0
    prev = np.inf
    dim = 2 * n
    # shell terms grow until the Gaussian overtakes the comparison factor;
    # growth past this analytic peak can only mean numerical blow-up
    t_peak = 2.0 * np.sqrt(dim) * max(log_c3, 0.0) / (alpha * r * r)
    for s in range(max_shell):
        if s == 0:
            pts = np.zeros((1, dim))
        else:
            rng = np.arange(-s, s + 1)
            grids = np.meshgrid(*([rng] * dim), indexing="ij")
            pts = np.stack([g.ravel() for g in grids], axis=-1)
            pts = pts[np.abs(pts).max(axis=1) == s]
        t = np.linalg.norm(pts, axis=1)
        with np.errstate(over="ignore"):  # overflow is reported as divergence
            shell = float(np.exp(-0.25 * alpha * r * r * t * t
                                 + np.sqrt(dim) * t * log_c3).sum())
        total += shell
        if not np.isfinite(total):
            raise SeriesDiverging("lattice sum overflowed; the restricted "
                                  "constant is effectively unbounded here")
        if s > t_peak + 3 and shell > prev:
            growth += 1
            if growth >= 3:
                raise SeriesDiverging(
                    "lattice shell sums grew three shells in a row past the "
                    "Gaussian crossover; treating the sum as divergent")
        else:
            growth = 0
        if s > t_peak and shell < trunc * total:
            return total
        prev = shell
    raise SeriesDiverging("lattice sum did not converge within the shell cap")


def _batch_opnorms(mats):
    return np.linalg.svd(mats, compute_uv=False)[..., 0]


def maximal_upper_bound(spec, p, alpha, r, region_halfwidth=2.0,
                        resolution=16, seed=0):
    """Fully explicit upper bound on the maximal operator norm.

    Every hidden comparison constant is replaced by an explicit one: the
    covering constant e^{alpha n r^2}, the lattice comparison factor
    (3^{2n} A_{p,3r})^{sqrt(2n)|m|} with a sqrt(d) from reducing operators,
    and the double Gaussian lattice series summed to a 1e-12 relative tail.
    """
    from .apr import apr_constant, sweep_centers
    from .linalg import real_to_point

    n, d = spec.n, spec.d
    a3 = apr_constant(spec, p, 3 * r, max(region_halfwidth, 6 * r),
                      resolution=resolution,
                      seed=seed, with_sandwich=False).apr_direct
    log_c3 = 2 * n * np.log(3.0) + np.log(a3)
    K = _lattice_gaussian_sum(alpha, r, n, log_c3)

    centers, _ = sweep_centers(spec, r, region_halfwidth, r)
    J1 = J2 = 0.0
    pp = p / (p - 1.0) if p > 1 else np.inf
    for v in centers:
        Q = Cube(real_to_point(v), r)
        rho = avg_norm(spec, p, Q, resolution, check_tol=None)
        R = reducing_operator(rho, seed=seed).matrix
        Rinv = np.linalg.inv(R)
        nodes = Q.midpoint_nodes(resolution)
        W = weight_at_points(spec, nodes)
        n1 = _batch_opnorms(R[None] @ matrix_power(W, -1.0 / p))
        n2 = _batch_opnorms(matrix_power(W, 1.0 / p) @ Rinv[None])
        if p > 1:
            I1 = Q.volume * float((n1 ** pp).mean())
            I2 = Q.volume * float((n2 ** p).mean())
            J1 = max(J1, I1 ** (1.0 / pp))
            J2 = max(J2, I2 ** (1.0 / p))
        else:
            J1 = max(J1, float(n1.max()))
            J2 = max(J2, Q.volume * float(n2.mean()))
    return float((alpha / np.pi) ** n * np.exp(alpha * n * r * r)
                 * np.sqrt(d) * K * J1 * J2)


def localization_bound_check(spec, p, alpha, u, r, grid):
    """||P_{alpha,u,r}|| <= e^{n alpha r^2 / 2} ||P_alpha|| at p = 2."""
    if p != 2:
        raise InvalidSpec("localization check requires p = 2")
    lhs = localized_norm_p2(spec, alpha, u, r, grid)
    rhs = np.exp(grid.n * alpha * r * r / 2.0) * projection_norm_p2(spec, alpha, grid)
    return lhs, rhs, lhs <= rhs * (1 + 1e-2)
