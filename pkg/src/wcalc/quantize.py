"""Pseudo-differential quantizations, the kernel map ``A`` and Toeplitz operators
as dense matrices acting on sampled configuration functions."""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .phasespace import (
    ConfigFn, GridSpec, PhaseFn, _require_1d, make_grid, symmetry_transform,
    trig_interp_matrix,
)
from .transforms import _dft_2n_central, _shift_index, kernel_to_symbol, wigner_t

__all__ = [
    "OperatorMatrix", "op_t", "A_op", "A_inv", "symbol_from_op", "toeplitz",
    "rank_one", "write_operator", "read_operator",
]

_SQ2PI = np.sqrt(2 * np.pi)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense operator with quadrature-weighted action ``(T f)_i = sum_j M_ij f_j dx``."""

    grid: GridSpec
    entries: np.ndarray

    def __post_init__(self):
        n = self.grid.N ** self.grid.d
        M = np.array(self.entries, dtype=complex)
        if M.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix, got {M.shape}")
        if not np.all(np.isfinite(M)):
            raise ValueError("operator entries must be finite")
        M.setflags(write=False)
        object.__setattr__(self, "entries", M)

    @property
    def weighted(self) -> np.ndarray:
        """The matrix acting on sample vectors: ``M dx``."""
        return self.entries * self.grid.dx

    def apply(self, f: ConfigFn) -> ConfigFn:
        return f.with_values(self.weighted @ f.values)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if self.grid != other.grid:
            raise ValueError("operators live on different grids")
        return OperatorMatrix(self.grid, self.entries @ other.entries * self.grid.dx)

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.grid, self.entries + other.entries)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.grid, self.entries - other.entries)

    def __mul__(self, c) -> "OperatorMatrix":
        return OperatorMatrix(self.grid, self.entries * c)

    __rmul__ = __mul__

    def adjoint(self) -> "OperatorMatrix":
        return OperatorMatrix(self.grid, self.entries.conj().T)

    def hermitian_part(self) -> "OperatorMatrix":
        return OperatorMatrix(self.grid, (self.entries + self.entries.conj().T) / 2)

    def hs_norm(self) -> float:
        """Frobenius norm of the kernel under quadrature, ``(sum |K|^2 dx^2)^{1/2}``."""
        return float(np.linalg.norm(self.entries) * self.grid.dx)


def rank_one(f1: ConfigFn, f2: ConfigFn) -> OperatorMatrix:
    """The operator ``f -> (f, f2) f1``."""
    return OperatorMatrix(f1.grid, np.outer(f1.values, np.conj(f2.values)))


# ---------------------------------------------------------------- quantizations

@lru_cache(maxsize=16)
def _offset_tables(n: int, dx: float):
    i = np.arange(n)
    diff_idx = i[:, None] - i[None, :] + n - 1                 # x_i - x_j
    sum_idx = i[:, None] + i[None, :]                          # x_i + x_j
    off = np.arange(-(n - 1), n) * dx
    tot = (np.arange(2 * n - 1) - n) * dx
    return diff_idx, sum_idx, off, tot


def _check_lattice(a: PhaseFn) -> None:
    _require_1d(a.grid)
    if not np.isclose(a.spacing[1], a.grid.deta, rtol=1e-12) or \
            not np.isclose(a.spacing[0], a.grid.dx, rtol=1e-12):
        raise ValueError("quantization expects a symbol on the symbol lattice")


def op_t(a: PhaseFn, t: float = 0.5) -> OperatorMatrix:
    """Kernel ``K(x, y) = (2 pi)^{-1} int a((1-t) x + t y, xi) e^{i (x - y) xi} dxi``.

    The first argument is resampled by trigonometric interpolation; the
    ``xi`` integral is a Riemann sum on the symbol lattice.
    """
    _check_lattice(a)
    grid = a.grid
    n, dx = grid.N, grid.dx
    diff_idx, sum_idx, off, tot = _offset_tables(n, dx)
    P = np.exp(1j * np.outer(off, grid.eta))                   # (i - j, n)
    c = grid.deta / (2 * np.pi)
    if t == 0.5:
        R = trig_interp_matrix(n, dx, tot / 2) @ a.values      # (i + j, n)
        K = (R @ P.T)[sum_idx, diff_idx]
        return OperatorMatrix(grid, c * K)
    x = grid.x
    z = ((1 - t) * x[:, None] + t * x[None, :])
    uniq, inv = np.unique(np.round(z.ravel() / dx, 10), return_inverse=True)
    R = trig_interp_matrix(n, dx, uniq * dx) @ a.values        # (unique z, n)
    inv = inv.reshape(n, n)
    K = np.empty((n, n), dtype=complex)
    for i in range(n):
        K[i] = np.einsum("jn,jn->j", R[inv[i]], P[diff_idx[i]])
    return OperatorMatrix(grid, c * K)


def A_op(a: PhaseFn) -> OperatorMatrix:
    """``(Aa)(x, y) = (2 pi)^{-1/2} int a((y - x)/2, xi) e^{-i (x + y) xi} dxi``."""
    _check_lattice(a)
    grid = a.grid
    n, dx = grid.N, grid.dx
    diff_idx, sum_idx, off, tot = _offset_tables(n, dx)
    R = trig_interp_matrix(n, dx, -off / 2) @ a.values         # (i - j, n) at (y - x)/2
    P = np.exp(-1j * np.outer(tot, grid.eta))                  # (i + j, n)
    K = (R @ P.T)[diff_idx, sum_idx]
    return OperatorMatrix(grid, grid.deta / _SQ2PI * K)


@lru_cache(maxsize=16)
def _half_grid_tables(n: int, dx: float):
    q = np.arange(-2 * n, 2 * n)                               # points q dx / 2
    I = trig_interp_matrix(n, dx, q * dx / 2)
    k = (np.arange(n) - n // 2)[:, None]
    s = np.arange(-n, n)[None, :]
    u_idx = (s - 2 * k) + 2 * n                                # 2u/dx = s - 2k
    v_idx = (s + 2 * k) + 2 * n
    return I, np.clip(u_idx, 0, 4 * n - 1), np.clip(v_idx, 0, 4 * n - 1), \
        (u_idx >= 0) & (u_idx < 4 * n) & (v_idx >= 0) & (v_idx < 4 * n)


def A_inv(U: OperatorMatrix) -> PhaseFn:
    """``(A^{-1} U)(x, xi) = (2 pi)^{-1/2} int e^{i y xi} U(y/2 - x, y/2 + x) dy``.

    ``U`` is resampled on the half grid by trigonometric interpolation in both
    variables; the ``y`` sum runs over ``2N`` points of spacing ``dx``.
    """
    grid = U.grid
    _require_1d(grid)
    n, dx = grid.N, grid.dx
    I, u_idx, v_idx, ok = _half_grid_tables(n, dx)
    C = I @ U.entries @ I.T                                    # U on the half grid
    g = np.where(ok, C[u_idx, v_idx], 0)                       # (k, s)
    vals = dx / _SQ2PI * _dft_2n_central(g, +1)
    return PhaseFn(grid, vals, grid.symbol_spacing)


def symbol_from_op(T: OperatorMatrix, t: float = 0.5) -> PhaseFn:
    """The ``t``-symbol of an operator: ``a(x, xi) = int K(x + t y, x - (1-t) y) e^{-i y xi} dy``."""
    grid = T.grid
    return PhaseFn(grid, kernel_to_symbol(T.entries, grid, t), grid.symbol_spacing)


# ---------------------------------------------------------------- Toeplitz

def _toeplitz_direct(a: PhaseFn, h1: ConfigFn, h2: ConfigFn) -> np.ndarray:
    """``M`` with ``dx^2 f2^H M f1 = sum a V_{h1 check} f1 conj(V_{h2 check} f2) cell``."""
    grid = a.grid
    n, dx = grid.N, grid.dx
    h_eta = a.spacing[1]
    eta = grid.points(h_eta)
    sidx = _shift_index(n)                                     # [i, k] -> x_k - y_i
    H1 = h1.values[sidx]
    H2 = h2.values[sidx]
    w = np.arange(-(n - 1), n) * dx
    C = a.values @ np.exp(1j * np.outer(eta, w))               # (k, i - j)
    diff_idx = np.arange(n)[:, None] - np.arange(n)[None, :] + n - 1
    M = np.zeros((n, n), dtype=complex)
    for k in range(n):
        M += np.outer(H2[:, k], np.conj(H1[:, k])) * C[k, diff_idx]
    return M * a.cell / (2 * np.pi)


def toeplitz(a: PhaseFn, h1: ConfigFn, h2: ConfigFn, route: str = "direct",
             t: float = 0.5) -> OperatorMatrix:
    """Toeplitz operator with ``(Tp f1, f2) = (a V_{h1 check} f1, V_{h2 check} f2)``.

    ``route='direct'`` builds the bilinear form from short-time Fourier
    transforms; ``route='weyl'`` quantizes ``a * u`` with
    ``u(X) = (2 pi)^{-1/2} W^t_{h2,h1}(-X)`` in the ``t`` calculus.
    """
    from .products import convolve
    if not np.any(h1.values) or not np.any(h2.values):
        raise ValueError("windows must be nonzero")
    if route == "direct":
        return OperatorMatrix(a.grid, _toeplitz_direct(a, h1, h2))
    if route == "weyl":
        u = symmetry_transform(wigner_t(h2, h1, t), "reflect") * (2 * np.pi) ** -0.5
        return op_t(convolve(a, u), t)
    raise ValueError(f"unknown route {route!r}")


# ---------------------------------------------------------------- file format

def write_operator(path, T: OperatorMatrix) -> None:
    header = {"N": T.grid.N, "d": T.grid.d, "L": T.grid.L}
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8") + b"\n")
        fh.write(np.ascontiguousarray(T.entries, dtype="<c16").tobytes())


def read_operator(path) -> OperatorMatrix:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        raw = fh.read()
    grid = make_grid(header["d"], header["N"], header["L"])
    n = grid.N ** grid.d
    vals = np.frombuffer(raw, dtype="<c16")
    if vals.size != n * n:
        raise ValueError(f"expected {n * n} entries, file holds {vals.size}")
    return OperatorMatrix(grid, vals.reshape(n, n).astype(complex))
