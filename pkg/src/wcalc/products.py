"""Convolution, twisted convolution, Weyl products and dilated products of symbols.

Symbols live on the symbol lattice, where ``e^{2 i sigma(X, Y)}`` is the
character ``exp(2 pi i (j m - k n) / N)`` of the index group; the twisted
convolution below is therefore an exact finite sum identity-wise.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from .phasespace import (
    PhaseFn, _check_symbol_lattice, sympl_fourier, symmetry_transform,
    trig_interp_matrix,
)
from .transforms import _coarse_guard, _shift_index, sympl_stft

__all__ = [
    "convolve", "twisted_convolve", "weyl_product", "weyl_product_t",
    "weyl_stft_oracle", "twisted_stft_oracle", "dilated_conv_pair", "dilation_pairs",
    "pointwise_domination", "odd_monomial", "refine_symbol", "smooth_one",
]

_TWIST_C = np.sqrt(2 / np.pi)


def _same(a: PhaseFn, b: PhaseFn) -> None:
    if a.grid != b.grid or not np.allclose(a.spacing, b.spacing, rtol=1e-14, atol=0):
        raise ValueError("symbols live on different lattices")


def smooth_one(grid, spacing=None, frac: float = 0.8) -> PhaseFn:
    """Stand-in for the constant symbol 1: ``exp(-(|X| / L0)^8)`` with ``L0 = frac L``."""
    a = PhaseFn(grid, np.zeros((grid.N, grid.N)), spacing)
    x, e = a.coords
    L0 = frac * grid.L
    return a.with_values(np.exp(-((x ** 2 + e ** 2) / L0 ** 2) ** 4))


def convolve(a: PhaseFn, b: PhaseFn) -> PhaseFn:
    """Periodic convolution ``int a(X - Y) b(Y) dY`` by FFT."""
    _same(a, b)
    fa = np.fft.fft2(np.fft.ifftshift(a.values))
    fb = np.fft.fft2(np.fft.ifftshift(b.values))
    return a.with_values(np.fft.fftshift(np.fft.ifft2(fa * fb)) * a.cell)


def _char(n: int) -> np.ndarray:
    """``exp(2 pi i j m / n)`` over centered indices."""
    j = np.arange(n) - n // 2
    return np.exp(2j * np.pi * np.outer(j, j) / n)


def _twist_direct(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    chi = _char(n)
    idx = _shift_index(n).T                     # idx[k, j] -> index of x_k - y_j
    out = np.empty((n, n), dtype=complex)
    for k in range(n):
        bk = b * np.conj(chi[k])[None, :]       # b(Y) e^{-2 i x_k eta}
        rows = a[idx[k]]                        # a(x_k - y_j, .) for each j
        shifted = rows[:, idx]                  # [j, m, n] -> a(x_k - y_j, eta_m - eta_n)
        inner = np.einsum("jmn,jn->jm", shifted, bk)
        out[k] = np.einsum("jm,jm->m", inner, chi)
    return out


def _twist_fft(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    chi = _char(n)
    idx = _shift_index(n).T
    A = a[idx]                                  # [k, j, .] = a(x_k - y_j, .)
    B = b[None, :, :] * np.conj(chi)[:, None, :]   # [k, j, n]
    fa = np.fft.fft(np.fft.ifftshift(A, axes=2), axis=2)
    fb = np.fft.fft(np.fft.ifftshift(B, axes=2), axis=2)
    conv = np.fft.fftshift(np.fft.ifft(fa * fb, axis=2), axes=2)   # [k, j, m]
    return np.einsum("kjm,jm->km", conv, chi)


def twisted_convolve(a: PhaseFn, b: PhaseFn, route: str = "fft") -> PhaseFn:
    """``(a *_sigma b)(X) = (2/pi)^{1/2} int a(X - Y) b(Y) e^{2 i sigma(X, Y)} dY``.

    ``route='direct'`` is the plain quadruple sum, ``'fft'`` evaluates the inner
    sum as a circular convolution (same quadrature, faster), and ``'A'`` goes
    through kernel composition: ``A^{-1}(Aa o Ab)``.
    """
    _same(a, b)
    _check_symbol_lattice(a)
    if route == "A":
        from .quantize import A_inv, A_op
        return A_inv(A_op(a) @ A_op(b))
    if route == "direct":
        vals = _twist_direct(a.values, b.values)
    elif route == "fft":
        vals = _twist_fft(a.values, b.values)
    else:
        raise ValueError(f"unknown route {route!r}")
    return a.with_values(_TWIST_C * a.cell * vals)


def weyl_product(a: PhaseFn, b: PhaseFn, route: str = "twist") -> PhaseFn:
    """Weyl product ``a # b``.

    ``route='twist'``: ``(2 pi)^{-1/2} a *_sigma F_sigma b``.  ``route='operator'``:
    the Weyl symbol of the composed matrices ``Op(a) Op(b)``.
    """
    _same(a, b)
    if route == "twist":
        return twisted_convolve(a, sympl_fourier(b)) * (2 * np.pi) ** -0.5
    if route == "operator":
        from .quantize import op_t, symbol_from_op
        return symbol_from_op(op_t(a, 0.5) @ op_t(b, 0.5), 0.5)
    raise ValueError(f"unknown route {route!r}")


def weyl_product_t(a: PhaseFn, b: PhaseFn, t: float) -> PhaseFn:
    """The product ``#_t`` with ``Op_t(a #_t b) = Op_t(a) Op_t(b)``."""
    from .transforms import calculus_transform
    wa = calculus_transform(a, t, 0.5)
    wb = calculus_transform(b, t, 0.5)
    return calculus_transform(weyl_product(wa, wb), 0.5, t)


# ---------------------------------------------------------------- STFT product oracles

def _wrap(i: np.ndarray, n: int) -> np.ndarray:
    """Index of the sum/difference of centered points, periodic."""
    return np.mod(i, n)


def weyl_stft_oracle(a1: PhaseFn, a2: PhaseFn, chi1: PhaseFn, chi2: PhaseFn,
                     points: Sequence[tuple[int, int, int, int]]) -> np.ndarray:
    """Right-hand side of the STFT-of-Weyl-product formula at index points
    ``(X, Y) = ((k, m), (j, l))``, summing over all ``Z`` of the lattice:

    ``int e^{2 i sigma(Z, Y)} V_chi1 a1(X - Y + Z, Z) V_chi2 a2(X + Z, Y - Z) dZ``.
    """
    _coarse_guard(a1.grid)
    V1 = sympl_stft(a1, chi1).values
    V2 = sympl_stft(a2, chi2).values
    return _stft_product_sum(V1, V2, points, a1.grid.N, a1.cell, twisted=False)


def twisted_stft_oracle(a1: PhaseFn, a2: PhaseFn, chi1: PhaseFn, chi2: PhaseFn,
                        points: Sequence[tuple[int, int, int, int]]) -> np.ndarray:
    """Right-hand side of the STFT-of-twisted-convolution formula:

    ``int e^{2 i sigma(X, Z - Y)} V_chi1 a1(X - Y + Z, Z) V_chi2 a2(Y - Z, X + Z) dZ``.
    """
    _coarse_guard(a1.grid)
    V1 = sympl_stft(a1, chi1).values
    V2 = sympl_stft(a2, chi2).values
    return _stft_product_sum(V1, V2, points, a1.grid.N, a1.cell, twisted=True)


def _stft_product_sum(V1, V2, points, n, cell, twisted: bool) -> np.ndarray:
    h = n // 2
    zk, zm = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    zkc, zmc = zk - h, zm - h
    out = []
    for (k, m, j, l) in points:
        kc, mc, jc, lc = k - h, m - h, j - h, l - h
        # centered coordinates of X - Y + Z, X + Z, Y - Z
        a_k, a_m = _wrap(kc - jc + zkc + h, n), _wrap(mc - lc + zmc + h, n)
        p_k, p_m = _wrap(kc + zkc + h, n), _wrap(mc + zmc + h, n)
        d_k, d_m = _wrap(jc - zkc + h, n), _wrap(lc - zmc + h, n)
        first = V1[a_k, a_m, zk, zm]
        if twisted:
            # sigma(X, Z - Y) with Z - Y = (zk - j, zm - l)
            phase = 2 * np.pi * ((zkc - jc) * mc - kc * (zmc - lc)) / n
            second = V2[d_k, d_m, p_k, p_m]
        else:
            # sigma(Z, Y) = y_j xi_z - x_z eta_l
            phase = 2 * np.pi * (jc * zmc - zkc * lc) / n
            second = V2[p_k, p_m, d_k, d_m]
        out.append(np.sum(np.exp(1j * phase) * first * second) * cell)
    return np.array(out)


# ---------------------------------------------------------------- dilated products

def dilation_pairs() -> dict[tuple[int, int], tuple[float, float] | None]:
    """One admissible ``(s, t)`` per sign pattern of
    ``(-1)^j s^{-2} + (-1)^k t^{-2} = 1``; ``None`` when no real pair exists."""
    r2 = np.sqrt(2.0)
    return {(0, 0): (r2, r2), (0, 1): (1 / r2, 1.0), (1, 0): (1.0, 1 / r2), (1, 1): None}


def check_dilation_identity(s: float, t: float, j: int, k: int) -> bool:
    """Exact rational test when ``s^2`` and ``t^2`` are rational, else 1e-12."""
    s2, t2 = s * s, t * t
    fs, ft = Fraction(s2).limit_denominator(10 ** 6), Fraction(t2).limit_denominator(10 ** 6)
    if abs(float(fs) - s2) < 1e-14 and abs(float(ft) - t2) < 1e-14:
        return (-1) ** j / fs + (-1) ** k / ft == 1
    return abs((-1) ** j / s2 + (-1) ** k / t2 - 1) <= 1e-12


def _refine(a: PhaseFn) -> PhaseFn:
    """Resample a symbol on the lattice with half the ``x`` step and the same ``L``:
    trigonometric interpolation in ``x``, zero extension in ``xi``."""
    from .phasespace import make_grid
    grid = a.grid
    n = grid.N
    fine = make_grid(grid.d, 2 * n, grid.L)
    vals = trig_interp_matrix(n, grid.dx, fine.x) @ a.values
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:, n // 2: n // 2 + n] = vals
    return PhaseFn(fine, out, fine.symbol_spacing)


def dilated_conv_pair(a: PhaseFn, b: PhaseFn, s: float, t: float, j: int, k: int,
                      nz: int | None = None):
    """Both sides of the dilated-convolution kernel identity.

    ``lhs = A(a(s .) * b(t .))`` and
    ``rhs = (2 pi)^{1/2} |s t|^{-1} int (T_{j, s z} Aa)(./s) (T_{k, -t z} Ab)(./t) dz``
    where ``T_{0,z} U(x, y) = U(x - z, y + z)`` and ``T_{1,z} U(x, y) = U(y - z, x + z)``.
    Both are returned as :class:`~wcalc.quantize.OperatorMatrix`.
    """
    from .quantize import A_op, OperatorMatrix
    if s * t == 0:
        raise ValueError("dilations must be nonzero")
    if not check_dilation_identity(s, t, j, k):
        raise ValueError(f"(s, t) = ({s}, {t}) violates the dilation identity for (j, k) = ({j}, {k})")
    _same(a, b)
    grid = a.grid
    n, dx = grid.N, grid.dx
    # the dilated convolution spreads in xi beyond the lattice box; evaluate it on a
    # grid with twice the frequency range and keep every other kernel sample
    fine_a, fine_b = _refine(a), _refine(b)
    fine = A_op(convolve(symmetry_transform(fine_a, "dilate", s),
                         symmetry_transform(fine_b, "dilate", t)))
    lhs = OperatorMatrix(grid, fine.entries[::2, ::2])

    s_abs, t_abs = abs(s), abs(t)
    zmax = 2 * grid.L / min(s_abs, t_abs)
    hz = dx / (s_abs + t_abs)
    nz = nz or int(np.ceil(zmax / hz))
    z = np.arange(-nz, nz) * hz

    i = np.arange(n)
    diff_idx = (i[:, None] - i[None, :]) + n - 1       # index of x_i - x_j
    sum_idx = i[:, None] + i[None, :]                  # index of x_i + x_j
    off = np.arange(-(n - 1), n) * dx
    tot = (np.arange(2 * n - 1) - n) * dx
    eta = grid.eta

    def tables(U: PhaseFn, c: float, sign: float, jj: int):
        # T_{0,w}: u = x/c - w, v = y/c + w  ->  (v - u)/2 = (y - x)/(2c) + w
        # T_{1,w}: u = y/c - w, v = x/c + w  ->  (v - u)/2 = (x - y)/(2c) + w
        # with w = sign c z; in both cases u + v = (x + y)/c
        w = sign * c * z
        d = (-off if jj == 0 else off)[None, :] / (2 * c) + w[:, None]     # (z, i - j)
        R = (trig_interp_matrix(n, dx, d.ravel()) @ U.values).reshape(len(z), 2 * n - 1, n)
        P = np.exp(-1j * np.outer(tot / c, eta))                          # (i + j, n)
        return R, P

    def inside(c: float, w: float, jj: int) -> np.ndarray:
        # zero extension of the kernel outside the box in both arguments
        first, second = (grid.x[:, None], grid.x[None, :]) if jj == 0 else \
            (grid.x[None, :], grid.x[:, None])
        return (np.abs(first / c - w) <= grid.L) & (np.abs(second / c + w) <= grid.L)

    Ra, Pa = tables(a, s, 1.0, j)
    Rb, Pb = tables(b, t, -1.0, k)
    norm = (2 * np.pi) ** -0.5 * grid.deta
    acc = np.zeros((n, n), dtype=complex)
    for zi in range(len(z)):
        fa = (Ra[zi] @ Pa.T)[diff_idx, sum_idx] * inside(s, s * z[zi], j)
        fb = (Rb[zi] @ Pb.T)[diff_idx, sum_idx] * inside(t, -t * z[zi], k)
        acc += fa * fb
    rhs = (2 * np.pi) ** 0.5 / abs(s * t) * norm ** 2 * acc * hz
    return lhs, OperatorMatrix(grid, rhs)


# ---------------------------------------------------------------- bounds and monomials

def pointwise_domination(a: PhaseFn, b: PhaseFn) -> tuple[float, float]:
    """``max (|a *_sigma b| - (2/pi)^{1/2} (|a| * |b|))`` over the lattice, and the
    scale ``max (2/pi)^{1/2} (|a| * |b|)`` it should be compared against."""
    tw = np.abs(twisted_convolve(a, b).values)
    bound = _TWIST_C * np.real(convolve(a.with_values(np.abs(a.values)),
                                        b.with_values(np.abs(b.values))).values)
    return float(np.max(tw - bound)), float(np.max(bound))


def refine_symbol(a: PhaseFn, times: int = 1) -> PhaseFn:
    """Apply the half-step resampling ``times`` times (doubles N and the ``xi`` range each time)."""
    for _ in range(int(times)):
        a = _refine(a)
    return a


def odd_monomial(a_list: Sequence[PhaseFn], alpha: Sequence[int], refine: int = 0) -> PhaseFn:
    """Pointwise product ``a_1^{alpha_1} ... a_N^{alpha_N}`` with ``|alpha|`` odd.

    A product of degree ``k`` has ``k`` times the spectral support of its
    factors, so on a coarse lattice it aliases once quantized. ``refine``
    resamples the factors that many times first; the result then lives on
    the refined lattice.
    """
    if len(a_list) != len(alpha) or not a_list:
        raise ValueError("one exponent per factor is required")
    if any(int(x) < 0 for x in alpha):
        raise ValueError("exponents must be nonnegative")
    if sum(alpha) % 2 == 0:
        raise ValueError(f"total degree {sum(alpha)} is even")
    for a in a_list:
        _same(a_list[0], a)
    factors = [refine_symbol(a, refine) for a in a_list]
    out = np.ones_like(factors[0].values)
    for a, e in zip(factors, alpha):
        for _ in range(int(e)):
            out = out * a.values
    return factors[0].with_values(out)
