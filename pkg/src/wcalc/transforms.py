"""Short-time Fourier transforms, t-Wigner distributions, the calculus
transform between quantizations and weighted mixed norms."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .phasespace import (
    ConfigFn, ExtExponent, GridSpec, PhaseFn, WeightFn, _cdft, _cidft,
    _check_symbol_lattice, _require_1d, trig_interp_matrix, weight_eval,
)

__all__ = [
    "Phase4Fn", "MixedNormSpec", "stft", "stft_matrix", "sympl_stft", "wigner_t",
    "kernel_to_symbol", "calculus_transform", "mixed_norm", "mod_norm",
    "sympl_mod_norm", "m2_partial_norm", "wigner_stft_norms", "COARSE_MAX_N",
]

COARSE_MAX_N = 32
_SQ2PI = np.sqrt(2 * np.pi)


@dataclass(frozen=True, eq=False)
class Phase4Fn:
    """Samples ``F(X, Y)`` on the product of two symbol lattices, axes
    ``(x, xi, y, eta)``."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        n = self.grid.N
        vals = np.array(self.values, dtype=complex).reshape(n, n, n, n)
        if not np.all(np.isfinite(vals)):
            raise ValueError("sampled values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def cell(self) -> float:
        return self.grid.cell_symbol ** 2

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.cell))


@dataclass(frozen=True)
class MixedNormSpec:
    """Exponents, integration order and weight of a mixed Lebesgue norm.

    ``order=1`` integrates the first variable inside, ``order=2`` the second.
    ``flavor`` picks the order used by :func:`mod_norm` (``'M'`` or ``'W'``).
    """

    p: ExtExponent
    q: ExtExponent
    order: int = 1
    weight: Optional[str] = None
    flavor: str = "M"

    def __post_init__(self):
        object.__setattr__(self, "p", ExtExponent.of(self.p))
        object.__setattr__(self, "q", ExtExponent.of(self.q))
        if self.order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        if self.flavor not in ("M", "W"):
            raise ValueError("flavor must be 'M' or 'W'")


# ---------------------------------------------------------------- STFT

def _shift_index(n: int) -> np.ndarray:
    """``idx[k, j]`` = array index of the point ``y_j - x_k`` (periodic)."""
    k = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    return (j - k + n // 2) % n


def _check_window(phi: ConfigFn) -> None:
    if not np.any(phi.values != 0):
        raise ValueError("window must be nonzero")


@lru_cache(maxsize=32)
def _freq_phase(n: int, lattice: str) -> np.ndarray:
    """``E[j, m] = exp(-i y_j xi_m)`` on the chosen frequency lattice."""
    j = np.arange(n) - n // 2
    if lattice == "tf":
        return np.exp(-2j * np.pi * np.outer(j, j) / n)
    return np.exp(-1j * np.pi * np.outer(j, j) / n)


def stft(f: ConfigFn, phi: ConfigFn, lattice: str = "tf") -> PhaseFn:
    """``V_phi f(x, xi) = (2 pi)^{-1/2} int f(y) conj(phi(y - x)) e^{-i y xi} dy``.

    Shifts wrap periodically.  ``lattice='tf'`` samples ``xi`` with spacing
    ``dxi`` (exact discrete Moyal identity); ``lattice='symbol'`` uses the finer
    symbol lattice.
    """
    _require_1d(f.grid)
    if f.grid != phi.grid:
        raise ValueError("function and window live on different grids")
    _check_window(phi)
    n, dx = f.grid.N, f.grid.dx
    prod = f.values[None, :] * np.conj(phi.values[_shift_index(n)])
    if lattice == "tf":
        vals = dx / _SQ2PI * _cdft(prod, 1)
        spacing = f.grid.tf_spacing
    elif lattice == "symbol":
        vals = dx / _SQ2PI * (prod @ _freq_phase(n, "symbol"))
        spacing = f.grid.symbol_spacing
    else:
        raise ValueError(f"unknown lattice {lattice!r}")
    return PhaseFn(f.grid, vals, spacing)


def stft_matrix(phi: ConfigFn, lattice: str = "tf") -> np.ndarray:
    """Matrix ``S`` with ``stft(f).values.ravel() == S @ f.values``."""
    _check_window(phi)
    grid = phi.grid
    n, dx = grid.N, grid.dx
    E = _freq_phase(n, lattice)                       # (j, m)
    win = np.conj(phi.values[_shift_index(n)])        # (k, j)
    S = dx / _SQ2PI * win[:, None, :] * E.T[None, :, :]   # (k, m, j)
    return S.reshape(n * n, n)


# ---------------------------------------------------------------- symplectic STFT

def _coarse_guard(grid: GridSpec) -> None:
    if grid.N > COARSE_MAX_N:
        raise MemoryError(f"four-variable objects need N <= {COARSE_MAX_N}, got {grid.N}")


def _translates(phi: np.ndarray) -> np.ndarray:
    """``T[k, m, j, n] = phi(Y - X)`` at ``X = (k, m)``, ``Y = (j, n)``, periodic."""
    n = phi.shape[0]
    idx = _shift_index(n)                              # (k, j)
    return phi[idx[:, None, :, None], idx[None, :, None, :]]


def _sympl_fourier_last2(v: np.ndarray) -> np.ndarray:
    """Symplectic Fourier transform over the last two axes (symbol lattice)."""
    n = v.shape[-1]
    inner = _cdft(v, v.ndim - 1)
    outer = _cidft(inner, v.ndim - 2)
    return np.swapaxes(outer, -1, -2) / n


def sympl_stft(a: PhaseFn, phi: PhaseFn) -> Phase4Fn:
    """``V_phi a(X, Y) = F_sigma(a phi(. - X))(Y)`` on the coarse symbol lattice."""
    _coarse_guard(a.grid)
    _check_symbol_lattice(a)
    if not np.any(phi.values != 0):
        raise ValueError("window must be nonzero")
    prod = a.values[None, None, :, :] * _translates(phi.values)
    return Phase4Fn(a.grid, _sympl_fourier_last2(prod))


# ---------------------------------------------------------------- Wigner

@lru_cache(maxsize=32)
def _sheared_interp(n: int, h: float, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Interpolation matrices for ``x + t y`` and ``x - (1 - t) y`` with
    ``y = s h``, ``s in [-n, n)``; rows ordered ``(k, s)``."""
    x = (np.arange(n) - n // 2) * h
    y = np.arange(-n, n) * h
    plus = (x[:, None] + t * y[None, :]).ravel()
    minus = (x[:, None] - (1 - t) * y[None, :]).ravel()
    return trig_interp_matrix(n, h, plus), trig_interp_matrix(n, h, minus)


def _dft_2n_central(g: np.ndarray, sign: int) -> np.ndarray:
    """``sum_s g[:, s] exp(sign i pi s m / n)`` for ``s in [-n, n)``, returning
    the ``n`` central frequencies ``m in [-n/2, n/2)``."""
    n2 = g.shape[1]
    n = n2 // 2
    full = _cdft(g, 1) if sign < 0 else _cidft(g, 1)
    return full[:, n // 2: n // 2 + n]


def _half_shift_symbol(K: np.ndarray) -> np.ndarray:
    """``sum_s K[k + s, k - s] e^{-2 pi i s m / n}`` with zero outside the box."""
    n = K.shape[0]
    k = np.arange(n)[:, None]
    s = (np.arange(n) - n // 2)[None, :]
    i, j = k + s, k - s
    ok = (i >= 0) & (i < n) & (j >= 0) & (j < n)
    g = np.where(ok, K[np.clip(i, 0, n - 1), np.clip(j, 0, n - 1)], 0)
    return _cdft(g, 1)


def kernel_to_symbol(K: np.ndarray, grid: GridSpec, t: float) -> np.ndarray:
    """Samples of ``int K(x + t y, x - (1 - t) y) e^{-i y xi} dy`` on the symbol
    lattice, for a kernel ``K`` sampled on the configuration grid."""
    n, dx = grid.N, grid.dx
    K = np.asarray(K, dtype=complex)
    if t == 0.5:
        return 2 * dx * _half_shift_symbol(K)
    Mp, Mm = _sheared_interp(n, dx, float(t))
    vals = np.einsum("pi,ij,pj->p", Mp, K, Mm, optimize=True).reshape(n, 2 * n)
    return dx * _dft_2n_central(vals, -1)


def wigner_t(f1: ConfigFn, f2: ConfigFn, t: float = 0.5) -> PhaseFn:
    """``W^t_{f1,f2}(x, xi) = (2 pi)^{-1/2} int f1(x + t y) conj(f2(x - (1-t) y)) e^{-i y xi} dy``.

    At ``t = 1/2`` the substitution ``y = 2 s dx`` keeps every sample on the grid;
    other ``t`` use trigonometric interpolation with zero extension outside the box.
    """
    _require_1d(f1.grid)
    if f1.grid != f2.grid or f1.space != "x" or f2.space != "x":
        raise ValueError("Wigner distributions need two configuration functions on one grid")
    grid = f1.grid
    n, dx = grid.N, grid.dx
    if t == 0.5:
        vals = 2 * dx / _SQ2PI * _half_shift_symbol(np.outer(f1.values, np.conj(f2.values)))
    else:
        Mp, Mm = _sheared_interp(n, dx, float(t))
        g = ((Mp @ f1.values) * np.conj(Mm @ f2.values)).reshape(n, 2 * n)
        vals = dx / _SQ2PI * _dft_2n_central(g, -1)
    return PhaseFn(grid, vals, grid.symbol_spacing)


# ---------------------------------------------------------------- calculus transform

def calculus_transform(a: PhaseFn, s: float, t: float) -> PhaseFn:
    """Change of quantization: ``a_s(x, D)`` equals ``b_t(x, D)`` for the result ``b``.

    The discrete Fourier transform of ``a`` (kernel ``e^{-i(ux + v xi)}``) is
    multiplied by ``e^{i (s - t) u v}``."""
    if s == t:
        return a
    n = a.grid.N
    h1, h2 = a.spacing
    u = 2 * np.pi * np.fft.fftfreq(n, h1)
    v = 2 * np.pi * np.fft.fftfreq(n, h2)
    mult = np.exp(1j * (s - t) * np.outer(u, v))
    return a.with_values(np.fft.ifft2(np.fft.fft2(a.values) * mult))


# ---------------------------------------------------------------- norms

def _lp(v: np.ndarray, p: ExtExponent, h: float, axis: int) -> np.ndarray:
    if p.is_inf:
        return np.max(v, axis=axis)
    pf = float(p.value)
    return (np.sum(v ** pf, axis=axis) * h) ** (1 / pf)


def mixed_norm(F: PhaseFn, spec: MixedNormSpec, omega: Optional[WeightFn] = None) -> float:
    """Weighted mixed Lebesgue norm of ``F``; ``order=1`` integrates ``x`` first."""
    h1, h2 = F.spacing
    w = 1.0
    if omega is not None:
        w = omega.on(F.spacing).values
    elif spec.weight is not None:
        w = weight_eval(spec.weight, F.grid, F.spacing).values
    v = np.abs(F.values) * w
    if spec.order == 1:
        return float(_lp(_lp(v, spec.p, h1, 0), spec.q, h2, 0))
    return float(_lp(_lp(v, spec.q, h2, 1), spec.p, h1, 0))


def mod_norm(f: ConfigFn, spec: MixedNormSpec, phi: ConfigFn,
             omega: Optional[WeightFn] = None) -> float:
    """Modulation norm: mixed norm of ``stft(f, phi)``, order 1 for ``M``, 2 for ``W``."""
    order = 1 if spec.flavor == "M" else 2
    inner = MixedNormSpec(spec.p, spec.q, order, spec.weight, spec.flavor)
    return mixed_norm(stft(f, phi, "tf"), inner, omega)


def sympl_mod_norm(a: PhaseFn, p, q, flavor: str = "M", phi: Optional[PhaseFn] = None,
                   weight4=None) -> float:
    """Modulation norm of a symbol via the symplectic STFT.

    ``flavor='M'`` integrates ``X`` inside, ``'W'`` integrates ``Y`` inside.
    ``weight4`` is an optional callable ``w(X1, X2, Y1, Y2)``; the default window
    is ``exp(-|X|^2)``. The transform is streamed one ``x``-row of ``X`` at a
    time, so any grid size fits in memory.
    """
    _check_symbol_lattice(a)
    p, q = ExtExponent.of(p), ExtExponent.of(q)
    if flavor not in ("M", "W"):
        raise ValueError(f"unknown flavor {flavor!r}")
    x, e = a.coords
    if phi is None:
        phi = a.with_values(np.exp(-x ** 2 - e ** 2))
    if not np.any(phi.values != 0):
        raise ValueError("window must be nonzero")
    n, c = a.grid.N, a.cell
    idx = _shift_index(n)
    xs, es = a.grid.points(a.spacing[0]), a.grid.points(a.spacing[1])
    acc = np.zeros((n, n))                             # M: over Y; W: over X
    for k in range(n):
        T = phi.values[idx[k][None, :, None], idx[:, None, :]]      # (m, j, n')
        V = np.abs(_sympl_fourier_last2(a.values[None] * T))        # (m, Y1, Y2)
        if weight4 is not None:
            V = V * weight4(xs[k], es[:, None, None], x[None], e[None])
        if flavor == "M":
            if p.is_inf:
                acc = np.maximum(acc, V.max(axis=0))
            else:
                acc += np.sum(V ** float(p.value), axis=0) * c
        else:
            acc[k] = _lp(V.reshape(n, n * n), q, c, 1)
    if flavor == "M":
        inner = acc if p.is_inf else acc ** (1 / float(p.value))
        return float(_lp(inner.ravel(), q, c, 0))
    return float(_lp(acc.ravel(), p, c, 0))


def m2_partial_norm(F: PhaseFn, omega: Optional[WeightFn], chi: ConfigFn) -> float:
    """Norm of a two-variable function via an STFT in the first variable only.

    ``F.values[x, y]`` holds samples on the configuration grid in both
    variables; the weight depends on the first variable's ``(x, xi)``.
    """
    nrm = float(np.sqrt(np.sum(np.abs(chi.values) ** 2) * chi.grid.dx))
    if not np.isclose(nrm, 1.0, rtol=1e-12):
        warnings.warn("window renormalized to unit L2 norm", stacklevel=2)
        chi = chi.with_values(chi.values / nrm)
    grid = F.grid
    n, dx = grid.N, grid.dx
    win = np.conj(chi.values[_shift_index(n)])                 # (k, j)
    prod = F.values.T[:, None, :] * win[None, :, :]            # (y, k, j)
    V = dx / _SQ2PI * _cdft(prod, 2)                           # (y, k, m)
    w = 1.0 if omega is None else omega.on(grid.tf_spacing).values[None]
    return float(np.sqrt(np.sum(np.abs(V * w) ** 2) * dx * grid.cell_tf))


def wigner_stft_norms(f: ConfigFn, phi: ConfigFn, spec: MixedNormSpec,
                      omega: Optional[WeightFn] = None) -> tuple[float, float]:
    """Both sides of ``||W_{f, phi check}||_{omega(2.)} = 2^{d(1-1/p-1/q)} ||V_phi f||_omega``.

    Both sides are restricted to ``|2x| < L/2``: ``W`` on its rows there and
    ``V`` on the matching points ``(2x, 2xi)`` (even ``x`` indices), so the two
    mixed norms are Riemann sums over corresponding cells. Near the box edge
    the periodic window shift of ``stft`` picks up the far side of ``f``.
    """
    _require_1d(f.grid)
    grid = f.grid
    n = grid.N
    check = phi.with_values(np.roll(phi.values[::-1], 1))
    W = wigner_t(f, check, 0.5).values[3 * n // 8: 5 * n // 8]
    V = stft(f, phi, "tf").values[n // 4: 3 * n // 4: 2]
    xw = grid.x[3 * n // 8: 5 * n // 8]
    wW = wV = 1.0
    if omega is not None:
        wW = omega.fn(2 * xw[:, None], 2 * grid.eta[None, :])
        wV = omega.fn(grid.x[n // 4: 3 * n // 4: 2][:, None], grid.xi[None, :])

    def norm(v, h1, h2):
        if spec.order == 1:
            return float(_lp(_lp(v, spec.p, h1, 0), spec.q, h2, 0))
        return float(_lp(_lp(v, spec.q, h2, 1), spec.p, h1, 0))

    lhs = norm(np.abs(W) * wW, grid.dx, grid.deta)
    factor = 2.0 ** (1 - float(spec.p.recip) - float(spec.q.recip))
    return lhs, factor * norm(np.abs(V) * wV, 2 * grid.dx, grid.dxi)
