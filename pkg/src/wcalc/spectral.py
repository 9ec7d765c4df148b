"""Weighted Hilbert spaces as Gram matrices, Schatten norms between them,
trace, duality pairing, polar decomposition and sigma-positivity."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .phasespace import (
    ConfigFn, ExtExponent, GridSpec, PhaseFn, WeightFn, gaussian, sympl_fourier,
    symmetry_transform,
)
from .quantize import A_op, OperatorMatrix, op_t
from .transforms import calculus_transform, stft_matrix, wigner_t

__all__ = [
    "TemperedSpace", "SpectralData", "make_space", "l2_space", "dual_space", "reflect_space",
    "conj_space", "singular_values", "operator_norm_sup", "schatten_norm", "trace",
    "schatten_duality_pair", "polar_decompose", "polar_reconstruct", "sigma_positive", "symbol_equivalences",
]

COND_CAP = 1e12
_SQ2PI = np.sqrt(2 * np.pi)


@dataclass(frozen=True, eq=False)
class TemperedSpace:
    """Finite-dimensional model of a weighted space with ``(f, g)_H = dx g^H G f``."""

    grid: GridSpec
    gram: np.ndarray
    omega: Optional[WeightFn] = None
    window: Optional[ConfigFn] = None
    label: str = "L2"
    sqrt: np.ndarray = field(init=False, repr=False)
    isqrt: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        G = np.array(self.gram, dtype=complex)
        G = (G + G.conj().T) / 2
        w, V = np.linalg.eigh(G)
        if w[0] <= 0:
            raise ValueError("Gram matrix must be positive definite")
        if w[-1] / w[0] > COND_CAP:
            raise ValueError(f"Gram condition number {w[-1] / w[0]:.3g} exceeds {COND_CAP:g}")
        for name, val in (("gram", G), ("sqrt", (V * np.sqrt(w)) @ V.conj().T),
                          ("isqrt", (V / np.sqrt(w)) @ V.conj().T)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    def inner(self, f: ConfigFn, g: ConfigFn) -> complex:
        return complex(self.grid.dx * np.vdot(g.values, self.gram @ f.values))

    def norm(self, f: ConfigFn) -> float:
        return float(np.sqrt(max(self.inner(f, f).real, 0.0)))

    def riesz(self, f: ConfigFn) -> ConfigFn:
        """``T_H f = G f``: the element of the dual representing ``(., f)_H``."""
        return f.with_values(self.gram @ f.values)


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Decreasing singular values with left and right vectors."""

    values: np.ndarray
    left: list
    right: list

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if np.any(v < 0) or np.any(np.diff(v) > 1e-12 * max(1.0, float(v[0]) if v.size else 1.0)):
            raise ValueError("singular values must be nonnegative and decreasing")
        object.__setattr__(self, "values", v)


def make_space(omega: Optional[WeightFn], phi: Optional[ConfigFn] = None,
               grid: Optional[GridSpec] = None) -> TemperedSpace:
    """``M^2_(omega)`` with Gram ``G = S^H diag(omega^2 cell) S / dx``, ``S`` the STFT map."""
    if grid is None:
        if omega is None and phi is None:
            raise ValueError("need a grid, a weight or a window")
        grid = omega.grid if omega is not None else phi.grid
    if phi is None:
        phi = gaussian(grid)
    nrm = float(np.sqrt(np.sum(np.abs(phi.values) ** 2) * grid.dx))
    phi = phi.with_values(phi.values / nrm)
    S = stft_matrix(phi, "tf")
    if omega is None:
        w2 = np.ones(S.shape[0])
        label = "L2"
    else:
        vals = omega.on(grid.tf_spacing).values.ravel()
        w2 = vals ** 2
        label = f"M2({omega.expr})"
    G = (S.conj().T * (w2 * grid.cell_tf)) @ S / grid.dx
    return TemperedSpace(grid, G, omega, phi, label)


def l2_space(grid: GridSpec) -> TemperedSpace:
    return TemperedSpace(grid, np.eye(grid.N), label="L2")


def dual_space(H: TemperedSpace) -> TemperedSpace:
    """L2-dual: Gram ``G^{-1}``; ``G f`` is the dual element of ``f``."""
    return TemperedSpace(H.grid, H.isqrt @ H.isqrt, H.omega, H.window, f"({H.label})'")


def _reflection(n: int) -> np.ndarray:
    return np.eye(n)[(-np.arange(n)) % n]


def reflect_space(H: TemperedSpace) -> TemperedSpace:
    """``{f : f(-.) in H}``."""
    R = _reflection(H.grid.N)
    return TemperedSpace(H.grid, R @ H.gram @ R, H.omega, H.window, f"check({H.label})")


def conj_space(H: TemperedSpace) -> TemperedSpace:
    """``{f : conj(f) in H}``."""
    return TemperedSpace(H.grid, H.gram.conj(), H.omega, H.window, f"tau({H.label})")


# ---------------------------------------------------------------- singular values

def _check_spaces(T: OperatorMatrix, H1: TemperedSpace, H2: TemperedSpace) -> None:
    if T.grid != H1.grid or T.grid != H2.grid:
        raise ValueError("operator and spaces live on different grids")


def singular_values(T: OperatorMatrix, H1: TemperedSpace, H2: TemperedSpace) -> SpectralData:
    """Singular values of ``T: H1 -> H2`` from ``G2^{1/2} (M dx) G1^{-1/2}``.

    ``right`` holds ``f_j`` orthonormal in ``H1``, ``left`` holds ``g_j``
    orthonormal in ``H2``, and ``T f_j = lambda_j g_j``.
    """
    _check_spaces(T, H1, H2)
    B = H2.sqrt @ T.weighted @ H1.isqrt
    U, s, Vh = np.linalg.svd(B)
    sdx = np.sqrt(T.grid.dx)
    f0 = ConfigFn(T.grid, np.zeros(T.grid.N))
    left = [f0.with_values(H2.isqrt @ U[:, j] / sdx) for j in range(s.size)]
    right = [f0.with_values(H1.isqrt @ Vh[j].conj() / sdx) for j in range(s.size)]
    return SpectralData(s, left, right)


def operator_norm_sup(T: OperatorMatrix, H1: TemperedSpace, H2: TemperedSpace) -> float:
    """``sup ||T f||_H2 / ||f||_H1`` as the top generalized eigenvalue of
    ``(M dx)^H G2 (M dx) v = mu G1 v``."""
    _check_spaces(T, H1, H2)
    Mw = T.weighted
    A = Mw.conj().T @ H2.gram @ Mw
    A = (A + A.conj().T) / 2
    n = A.shape[0]
    mu = sla.eigh(A, H1.gram, eigvals_only=True, subset_by_index=[n - 1, n - 1])
    return float(np.sqrt(max(mu[0], 0.0)))


def _lp_norm(s: np.ndarray, p: ExtExponent) -> float:
    if p.is_inf:
        return float(s.max(initial=0.0))
    pf = float(p.value)
    return float(np.sum(s ** pf) ** (1 / pf))


def _quantize(a: PhaseFn, t: float, flavor: str) -> OperatorMatrix:
    if flavor == "op_t":
        return op_t(a, t)
    if flavor == "A":
        return A_op(a)
    raise ValueError(f"unknown flavor {flavor!r}")


def schatten_norm(a: PhaseFn, t: float, p, H1: Optional[TemperedSpace] = None,
                  H2: Optional[TemperedSpace] = None, flavor: str = "op_t") -> float:
    """``l^p`` norm of the singular values of ``op_t(a, t)`` (or ``A_op(a)``) from H1 to H2."""
    H1 = H1 or l2_space(a.grid)
    H2 = H2 or l2_space(a.grid)
    s = singular_values(_quantize(a, t, flavor), H1, H2).values
    return _lp_norm(s, ExtExponent.of(p))


def trace(T: OperatorMatrix) -> complex:
    return complex(np.trace(T.entries) * T.grid.dx)


def schatten_duality_pair(a: PhaseFn, b: PhaseFn, t: float, p,
                          H1: Optional[TemperedSpace] = None,
                          H2: Optional[TemperedSpace] = None) -> tuple[float, float]:
    """``(|(a, b)_{L2}|, (2 pi)^d ||a||_{s_{t,p}(H1,H2)} ||b||_{s_{t,p'}(H1',H2')})``.

    The factor ``(2 pi)^d`` comes from ``tr(op_t(a) op_t(b)^*) = (2 pi)^{-d} (a, b)``.
    """
    H1 = H1 or l2_space(a.grid)
    H2 = H2 or l2_space(a.grid)
    p = ExtExponent.of(p)
    lhs = abs(a.inner(b))
    rhs = (2 * np.pi) ** a.grid.d * schatten_norm(a, t, p, H1, H2) * \
        schatten_norm(b, t, p.conj(), dual_space(H1), dual_space(H2))
    return float(lhs), float(rhs)


def polar_decompose(a: PhaseFn, t: float = 0.5, H1: Optional[TemperedSpace] = None,
                    H2: Optional[TemperedSpace] = None, tol: float = 0.0) -> SpectralData:
    """``a = sum lambda_j W^t_{g_j, phi_j}`` with ``g_j`` orthonormal in H2 and
    ``phi_j`` orthonormal in H1'.

    Singular values below ``tol * lambda_1`` are dropped.
    """
    H1 = H1 or l2_space(a.grid)
    H2 = H2 or l2_space(a.grid)
    sd = singular_values(op_t(a, t), H1, H2)
    keep = sd.values > tol * sd.values[0] if sd.values.size else sd.values > 0
    lam = _SQ2PI ** a.grid.d * sd.values[keep]
    left = [g for g, k in zip(sd.left, keep) if k]
    right = [H1.riesz(f) for f, k in zip(sd.right, keep) if k]
    return SpectralData(lam, left, right)


def polar_reconstruct(data: SpectralData, t: float = 0.5) -> PhaseFn:
    out = None
    for lam, g, phi in zip(data.values, data.left, data.right):
        term = wigner_t(g, phi, t) * lam
        out = term if out is None else out + term
    return out


def sigma_positive(a: PhaseFn, rtol: float = 1e-8) -> tuple[bool, float]:
    """Positivity of the Hermitian part of ``A_op(a)``; the tolerance scales with ``lambda_max``."""
    U = A_op(a).hermitian_part().weighted
    ev = np.linalg.eigvalsh(U)
    scale = float(np.max(np.abs(ev)))
    return bool(ev[0] >= -rtol * scale), float(ev[0])


def symbol_equivalences(a: PhaseFn, p, H1: Optional[TemperedSpace] = None,
                        H2: Optional[TemperedSpace] = None, t: float = 0.0,
                        rtol: float = 1e-7) -> dict:
    """Seven norms that coincide for every symbol ``a``.

    Each entry is normalised to the Weyl norm of ``a`` from H1 to H2; the
    A-flavour norms carry the factor ``(2 pi)^{-d/2}`` relating ``A`` to the
    Weyl quantization of the symplectic Fourier transform.
    """
    H1 = H1 or l2_space(a.grid)
    H2 = H2 or l2_space(a.grid)
    c = _SQ2PI ** -a.grid.d
    Fa = sympl_fourier(a)
    H1d, H2d = dual_space(H1), dual_space(H2)
    R1, R2 = reflect_space(H1), reflect_space(H2)
    norms = {
        "weyl": schatten_norm(a, 0.5, p, H1, H2),
        "fourier_weyl_reflected": schatten_norm(Fa, 0.5, p, H1, R2),
        "fourier_A": c * schatten_norm(Fa, 0.5, p, H1, H2, flavor="A"),
        "conj_dual": schatten_norm(symmetry_transform(a, "conj"), 0.5, p, H2d, H1d),
        "torsion_A": c * schatten_norm(symmetry_transform(a, "torsion"), 0.5, p,
                                       conj_space(H1), conj_space(R2), flavor="A"),
        "reflect": schatten_norm(symmetry_transform(a, "reflect"), 0.5, p, R1, R2),
        "tilde_dual": schatten_norm(symmetry_transform(a, "tilde"), 0.5, p,
                                    reflect_space(H2d), reflect_space(H1d)),
        "calculus": schatten_norm(calculus_transform(a, 0.5, t), t, p, H1, H2),
    }
    vals = np.array(list(norms.values()))
    spread = float((vals.max() - vals.min()) / max(vals.max(), 1e-300))
    return {"norms": norms, "spread": spread, "ok": spread <= rtol}
