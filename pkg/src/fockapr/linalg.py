"""Matrix weight families and Hermitian functional calculus.

Points of C^n are numpy complex arrays of shape (n,).  The real picture
R^{2n} uses the coordinate order (Re z_1, Im z_1, ..., Re z_n, Im z_n).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSpec, NumericalBreakdown

HERMITIAN_ATOL = 1e-12
PD_RTOL = 1e-12

WEIGHT_KINDS = ("constant", "scalar_exp", "scalar_power", "rotating", "checkerboard")


def as_point(z, n=None):
    """Coerce z to a complex (n,) array."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if n is not None and z.size != n:
        raise ValueError(f"expected a point in C^{n}, got shape {z.shape}")
    return z


def point_to_real(z):
    """C^n point -> R^{2n} vector, interleaved (Re, Im) per component."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty(2 * z.size)
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


def real_to_point(v):
    """R^{2n} vector -> C^n point."""
    v = np.asarray(v, dtype=float)
    return v[0::2] + 1j * v[1::2]


class HermitianPD:
    """A Hermitian positive-definite d x d matrix, validated on construction."""

    __slots__ = ("dim", "mat")

    def __init__(self, mat):
        mat = np.asarray(mat, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InvalidSpec(f"expected a square matrix, got shape {mat.shape}")
        if np.abs(mat - mat.conj().T).max() > HERMITIAN_ATOL:
            raise InvalidSpec("matrix is not Hermitian within 1e-12")
        ev = np.linalg.eigvalsh(mat)
        if ev[0] <= PD_RTOL * max(ev[-1], 0.0):
            raise InvalidSpec(
                f"matrix is not positive definite (lambda_min/lambda_max = "
                f"{ev[0] / max(ev[-1], 1e-300):.3e})"
            )
        self.dim = mat.shape[0]
        self.mat = 0.5 * (mat + mat.conj().T)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.mat, dtype=dtype)

    def __repr__(self):
        return f"HermitianPD(dim={self.dim})"


@dataclass(frozen=True)
class WeightSpec:
    """Symbolic descriptor of a matrix weight family W(z), evaluatable pointwise.

    Kinds:
      constant     -- W(z) = M for a fixed Hermitian PD matrix M.
      scalar_exp   -- W(z) = exp(beta * Re z_1) * I_d.
      scalar_power -- W(z) = (1 + |z|^2)^(gamma/2) * I_d.
      rotating     -- d=2, W(z) = U(omega Re z_1) diag(lam1, lam2) U(omega Re z_1)^T.
      checkerboard -- W(z) = A or B by the parity of the side-s cell containing z.
    """

    kind: str
    d: int
    n: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise InvalidSpec(f"unknown weight kind {self.kind!r}")
        if self.d < 1 or self.n < 1:
            raise InvalidSpec("d and n must be >= 1")
        p = self.params
        if self.kind == "constant":
            m = HermitianPD(p["matrix"])
            if m.dim != self.d:
                raise InvalidSpec("constant matrix dimension does not match d")
        elif self.kind == "scalar_exp":
            float(p["beta"])
        elif self.kind == "scalar_power":
            if float(p["gamma"]) < 0:
                raise InvalidSpec("scalar_power requires gamma >= 0")
        elif self.kind == "rotating":
            if self.d != 2:
                raise InvalidSpec("rotating weights require d = 2")
            if float(p["lam1"]) <= 0 or float(p["lam2"]) <= 0:
                raise InvalidSpec("rotating eigenvalues must be positive")
            float(p["omega"])
        elif self.kind == "checkerboard":
            a, b = HermitianPD(p["A"]), HermitianPD(p["B"])
            if a.dim != self.d or b.dim != self.d:
                raise InvalidSpec("checkerboard matrix dimensions do not match d")
            if float(p["s"]) <= 0:
                raise InvalidSpec("checkerboard cell side must be positive")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def constant(matrix, n=1):
        matrix = np.asarray(matrix, dtype=complex)
        return WeightSpec("constant", matrix.shape[0], n, {"matrix": matrix})

    @staticmethod
    def scalar_exp(beta, d=1, n=1):
        return WeightSpec("scalar_exp", d, n, {"beta": float(beta)})

    @staticmethod
    def scalar_power(gamma, d=1, n=1):
        return WeightSpec("scalar_power", d, n, {"gamma": float(gamma)})

    @staticmethod
    def rotating(lam1, lam2, omega, n=1):
        return WeightSpec(
            "rotating", 2, n,
            {"lam1": float(lam1), "lam2": float(lam2), "omega": float(omega)},
        )

    @staticmethod
    def checkerboard(A, B, s, n=1):
        A = np.asarray(A, dtype=complex)
        return WeightSpec("checkerboard", A.shape[0], n,
                          {"A": A, "B": np.asarray(B, dtype=complex), "s": float(s)})

    # -- JSON schema (shared with the CLI) ---------------------------------

    def to_json_dict(self):
        params = {}
        for k, v in self.params.items():
            if isinstance(v, np.ndarray):
                params[k] = [[float(c.real), float(c.imag)] for c in v.ravel()]
            else:
                params[k] = float(v)
        return {"kind": self.kind, "d": self.d, "n": self.n, "params": params}

    @staticmethod
    def from_json_dict(obj):
        try:
            kind = obj["kind"]
            d = int(obj["d"])
            n = int(obj["n"])
            raw = dict(obj.get("params", {}))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpec(f"malformed weight spec: {exc}") from exc
        params = {}
        for k, v in raw.items():
            if isinstance(v, list):
                flat = np.array([complex(re, im) for re, im in v])
                if flat.size != d * d:
                    raise InvalidSpec(f"field {k!r}: expected {d * d} entries")
                params[k] = flat.reshape(d, d)
            else:
                params[k] = float(v)
        return WeightSpec(kind, d, n, params)


def _checkerboard_parity(v, s):
    """Parity of the side-s cell containing the real point(s) v (..., 2n).

    Points exactly on a cell boundary snap to the lower cell, i.e. the one
    whose lower-left corner is lexicographically smaller.
    """
    t = np.asarray(v) / s
    idx = np.floor(t)
    on_edge = t == idx
    idx = np.where(on_edge, idx - 1, idx)
    return idx.sum(axis=-1).astype(int) % 2


def weight_at_points(spec, zs):
    """Evaluate W at a batch of points.

    zs: complex array (N, n).  Returns (N, d, d) complex.
    """
    zs = np.asarray(zs, dtype=complex)
    if zs.ndim == 1:
        zs = zs[:, None]
    N = zs.shape[0]
    d = spec.d
    p = spec.params
    if spec.kind == "constant":
        return np.broadcast_to(np.asarray(p["matrix"], dtype=complex), (N, d, d)).copy()
    if spec.kind == "scalar_exp":
        w = np.exp(p["beta"] * zs[:, 0].real)
        return w[:, None, None] * np.eye(d)[None]
    if spec.kind == "scalar_power":
        w = (1.0 + (np.abs(zs) ** 2).sum(axis=1)) ** (p["gamma"] / 2.0)
        return w[:, None, None] * np.eye(d)[None]
    if spec.kind == "rotating":
        th = p["omega"] * zs[:, 0].real
        c, s = np.cos(th), np.sin(th)
        U = np.empty((N, 2, 2))
        U[:, 0, 0], U[:, 0, 1] = c, -s
        U[:, 1, 0], U[:, 1, 1] = s, c
        lam = np.array([p["lam1"], p["lam2"]])
        return np.einsum("nij,j,nkj->nik", U, lam, U).astype(complex)
    if spec.kind == "checkerboard":
        v = np.empty((N, 2 * spec.n))
        v[:, 0::2] = zs.real
        v[:, 1::2] = zs.imag
        parity = _checkerboard_parity(v, p["s"])
        A = np.asarray(p["A"], dtype=complex)
        B = np.asarray(p["B"], dtype=complex)
        return np.where(parity[:, None, None] == 0, A[None], B[None])
    raise InvalidSpec(f"unknown weight kind {spec.kind!r}")


def eval_weight(spec, z):
    """Evaluate the matrix weight at a single point, with full validation."""
    z = as_point(z, spec.n)
    if not np.all(np.isfinite(z)):
        raise InvalidSpec("evaluation point must be finite")
    return HermitianPD(weight_at_points(spec, z[None, :])[0])


def matrix_power(M, t):
    """Hermitian fractional power via eigendecomposition.

    Accepts a HermitianPD, a (d, d) array, or a batch (N, d, d) array.
    Returns a plain ndarray of matching shape.
    """
    A = np.asarray(M, dtype=complex)
    try:
        ev, V = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalBreakdown(f"eigensolve failed: {exc}") from exc
    if np.any(ev <= 0):
        raise NumericalBreakdown("nonpositive eigenvalue in fractional power")
    pw = ev ** t
    if A.ndim == 2:
        out = (V * pw) @ V.conj().T
    else:
        out = np.einsum("nij,nj,nkj->nik", V, pw, V.conj())
    return 0.5 * (out + np.swapaxes(out.conj(), -1, -2))


def operator_norm(M):
    """Largest singular value of a (possibly non-Hermitian) complex matrix."""
    M = np.asarray(M, dtype=complex)
    if not np.all(np.isfinite(M)):
        raise ValueError("operator_norm: non-finite entries")
    return float(np.linalg.norm(M, 2))
