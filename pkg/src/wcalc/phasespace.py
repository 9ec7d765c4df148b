"""Grids, sampled functions, quadrature and the basic Fourier transforms.

Two phase-space lattices share every configuration grid:

* the *time-frequency* lattice, spacing ``(dx, dxi)`` with ``N dx dxi = 2 pi``.
  Short-time Fourier transforms and Gram matrices live here; the discrete
  Moyal identity is exact on it.
* the *symbol* lattice, spacing ``(dx, dxi / 2)``.  Symbols, Wigner
  distributions and everything touched by the symplectic Fourier transform
  live here.  On this lattice ``e^{2 i sigma(X, Y)}`` is an exact character of
  ``Z_N x Z_N``, so the symplectic Fourier transform is an exact unitary
  involution and twisted convolution is exactly associative.

All grids are periodic on ``[-L, L)``; index ``k`` sits at ``(k - N/2) h``.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Union

import numpy as np

__all__ = [
    "GridSpec", "make_grid", "ConfigFn", "PhaseFn", "WeightFn", "ExtExponent",
    "l2_inner", "l2_norm", "fourier", "inverse_fourier", "partial_fourier2",
    "partial_fourier2_inv", "sympl_form", "sympl_fourier", "parse_weight",
    "weight_eval", "check_moderate", "symmetry_transform", "trig_interp_matrix",
    "gaussian", "write_gfn", "read_gfn", "WeightParseError",
]


def _require_1d(grid: "GridSpec") -> None:
    if grid.d != 1:
        raise NotImplementedError("only d = 1 grids are supported by the transforms")


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on ``[-L, L)^d`` with ``N`` samples per axis."""

    d: int = 1
    N: int = 64
    L: float = 6.0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be positive, got {self.d}")
        if self.N < 8 or self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two and at least 8, got {self.N}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def dxi(self) -> float:
        return np.pi / self.L

    @property
    def deta(self) -> float:
        """Frequency spacing of the symbol lattice (half the dual spacing)."""
        return np.pi / (2.0 * self.L)

    @property
    def tf_spacing(self) -> tuple[float, float]:
        return (self.dx, self.dxi)

    @property
    def symbol_spacing(self) -> tuple[float, float]:
        return (self.dx, self.deta)

    def points(self, h: float) -> np.ndarray:
        return (np.arange(self.N) - self.N // 2) * h

    @property
    def x(self) -> np.ndarray:
        return self.points(self.dx)

    @property
    def xi(self) -> np.ndarray:
        return self.points(self.dxi)

    @property
    def eta(self) -> np.ndarray:
        return self.points(self.deta)

    @property
    def cell_config(self) -> float:
        return self.dx ** self.d

    @property
    def cell_tf(self) -> float:
        return (self.dx * self.dxi) ** self.d

    @property
    def cell_symbol(self) -> float:
        return (self.dx * self.deta) ** self.d


def make_grid(d: int = 1, N: int = 64, L: float = 6.0) -> GridSpec:
    return GridSpec(d=int(d), N=int(N), L=float(L))


def _frozen(values, shape) -> np.ndarray:
    arr = np.array(values, dtype=complex).reshape(shape)
    if not np.all(np.isfinite(arr)):
        raise ValueError("sampled values must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ConfigFn:
    """Samples of a function on the configuration grid (``space='x'``) or on
    its Fourier dual (``space='xi'``)."""

    grid: GridSpec
    values: np.ndarray
    space: str = "x"

    def __post_init__(self):
        if self.space not in ("x", "xi"):
            raise ValueError(f"unknown space {self.space!r}")
        object.__setattr__(self, "values", _frozen(self.values, (self.grid.N,) * self.grid.d))

    @property
    def spacing(self) -> float:
        return self.grid.dx if self.space == "x" else self.grid.dxi

    @property
    def points(self) -> np.ndarray:
        return self.grid.points(self.spacing)

    def with_values(self, values) -> "ConfigFn":
        return ConfigFn(self.grid, values, self.space)

    def __add__(self, other: "ConfigFn") -> "ConfigFn":
        _same_config(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "ConfigFn") -> "ConfigFn":
        _same_config(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, c) -> "ConfigFn":
        if isinstance(c, ConfigFn):
            _same_config(self, c)
            c = c.values
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def __neg__(self) -> "ConfigFn":
        return self.with_values(-self.values)

    def norm(self) -> float:
        return l2_norm(self)


@dataclass(frozen=True, eq=False)
class PhaseFn:
    """Samples on an ``N x N`` phase-space lattice, first axis position.

    ``spacing`` selects the lattice; it defaults to the symbol lattice.
    """

    grid: GridSpec
    values: np.ndarray
    spacing: Optional[tuple[float, float]] = None

    def __post_init__(self):
        _require_1d(self.grid)
        if self.spacing is None:
            object.__setattr__(self, "spacing", self.grid.symbol_spacing)
        object.__setattr__(self, "spacing", (float(self.spacing[0]), float(self.spacing[1])))
        object.__setattr__(self, "values", _frozen(self.values, (self.grid.N, self.grid.N)))

    @property
    def cell(self) -> float:
        return self.spacing[0] * self.spacing[1]

    @property
    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrid of the two coordinates, ``indexing='ij'``."""
        return np.meshgrid(self.grid.points(self.spacing[0]), self.grid.points(self.spacing[1]),
                           indexing="ij")

    def with_values(self, values) -> "PhaseFn":
        return PhaseFn(self.grid, values, self.spacing)

    def __add__(self, other: "PhaseFn") -> "PhaseFn":
        _same_phase(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "PhaseFn") -> "PhaseFn":
        _same_phase(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, c) -> "PhaseFn":
        if isinstance(c, PhaseFn):
            _same_phase(self, c)
            c = c.values
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def __neg__(self) -> "PhaseFn":
        return self.with_values(-self.values)

    def inner(self, other: "PhaseFn") -> complex:
        _same_phase(self, other)
        return complex(np.sum(self.values * np.conj(other.values)) * self.cell)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.cell))


def _same_config(f: ConfigFn, g: ConfigFn) -> None:
    if f.grid != g.grid or f.space != g.space:
        raise ValueError("configuration functions live on different grids")


def _same_phase(a: PhaseFn, b: PhaseFn) -> None:
    if a.grid != b.grid or not np.allclose(a.spacing, b.spacing, rtol=1e-14, atol=0):
        raise ValueError("phase-space functions live on different lattices")


def gaussian(grid: GridSpec) -> ConfigFn:
    """The normalized Gaussian ``pi^{-1/4} exp(-x^2/2)``."""
    return ConfigFn(grid, np.pi ** -0.25 * np.exp(-grid.x ** 2 / 2))


# ---------------------------------------------------------------- quadrature

def l2_inner(f: ConfigFn, g: ConfigFn) -> complex:
    _same_config(f, g)
    return complex(np.sum(f.values * np.conj(g.values)) * f.spacing ** f.grid.d)


def l2_norm(f: ConfigFn) -> float:
    return float(np.sqrt(np.sum(np.abs(f.values) ** 2) * f.spacing ** f.grid.d))


# ---------------------------------------------------------------- centered DFTs

def _cdft(v: np.ndarray, axis: int) -> np.ndarray:
    """``sum_k v_k exp(-2 pi i k' m' / N)`` with centered indices."""
    return np.fft.fftshift(np.fft.fft(np.fft.ifftshift(v, axes=axis), axis=axis), axes=axis)


def _cidft(v: np.ndarray, axis: int) -> np.ndarray:
    """``sum_k v_k exp(+2 pi i k' m' / N)`` with centered indices."""
    n = v.shape[axis]
    return n * np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(v, axes=axis), axis=axis), axes=axis)


def fourier(f: ConfigFn) -> ConfigFn:
    """``(2 pi)^{-1/2} int f(x) e^{+i x xi} dx`` sampled on the dual grid.

    The positive sign in the kernel is deliberate; applying the transform twice
    reflects the function.
    """
    _require_1d(f.grid)
    out = (2 * np.pi) ** -0.5 * f.spacing * _cidft(f.values, 0)
    return ConfigFn(f.grid, out, "xi" if f.space == "x" else "x")


def inverse_fourier(f: ConfigFn) -> ConfigFn:
    _require_1d(f.grid)
    out = (2 * np.pi) ** -0.5 * f.spacing * _cdft(f.values, 0)
    return ConfigFn(f.grid, out, "xi" if f.space == "x" else "x")


def partial_fourier2(F: PhaseFn) -> PhaseFn:
    """Forward transform (positive kernel sign) in the second variable."""
    h2 = F.spacing[1]
    out = (2 * np.pi) ** -0.5 * h2 * _cidft(F.values, 1)
    return PhaseFn(F.grid, out, (F.spacing[0], 2 * np.pi / (F.grid.N * h2)))


def partial_fourier2_inv(F: PhaseFn) -> PhaseFn:
    """Inverse Fourier transform in the second variable only.

    The output spacing in the second variable is ``2 pi / (N h2)``; starting from
    the time-frequency lattice this returns to the configuration grid.
    """
    h2 = F.spacing[1]
    out = (2 * np.pi) ** -0.5 * h2 * _cdft(F.values, 1)
    return PhaseFn(F.grid, out, (F.spacing[0], 2 * np.pi / (F.grid.N * h2)))


# ---------------------------------------------------------------- symplectic

def sympl_form(X, Y) -> float:
    """``sigma((x, xi), (y, eta)) = <y, xi> - <x, eta>``."""
    X = np.asarray(X, dtype=float).ravel()
    Y = np.asarray(Y, dtype=float).ravel()
    if X.shape != Y.shape or X.size % 2:
        raise ValueError("phase-space points must have the same even length")
    d = X.size // 2
    return float(Y[:d] @ X[d:] - X[:d] @ Y[d:])


def _check_symbol_lattice(a: PhaseFn) -> None:
    h1, h2 = a.spacing
    if not np.isclose(h1 * h2 * a.grid.N, np.pi, rtol=1e-12):
        raise ValueError("the symplectic Fourier transform needs the symbol lattice")


def sympl_fourier(a: PhaseFn) -> PhaseFn:
    """``pi^{-d} int a(Y) e^{2 i sigma(X, Y)} dY``; an exact involution on the lattice."""
    _check_symbol_lattice(a)
    inner = _cdft(a.values, 1)          # sum over eta against e^{-2i x eta}
    outer = _cidft(inner, 0)            # sum over y against e^{+2i y xi}
    return a.with_values(outer.T / a.grid.N)


# ---------------------------------------------------------------- interpolation

def _periodic_sinc(u: np.ndarray, n: int) -> np.ndarray:
    """Dirichlet kernel of the symmetric trigonometric interpolant (even ``n``)."""
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    r = np.mod(u + n / 2, n) - n / 2          # reduce to [-n/2, n/2)
    small = np.abs(r) < 1e-12
    rs = r[~small]
    out[~small] = np.sin(np.pi * rs) / (n * np.tan(np.pi * rs / n))
    out[small] = 1.0
    return out


def trig_interp_matrix(n: int, h: float, z: np.ndarray, zero_outside: bool = True) -> np.ndarray:
    """Matrix ``M`` with ``(M @ v)[i]`` the trigonometric interpolant of samples
    ``v`` on the centered grid of spacing ``h`` evaluated at ``z[i]``.

    Points outside ``[-n h / 2, n h / 2)`` give zero rows when ``zero_outside``.
    """
    z = np.asarray(z, dtype=float).ravel()
    nodes = (np.arange(n) - n // 2) * h
    M = _periodic_sinc((z[:, None] - nodes[None, :]) / h, n)
    if zero_outside:
        half = n * h / 2
        tol = 1e-9 * h
        outside = (z < -half - tol) | (z >= half - tol)
        M[outside] = 0.0
    return M


# ---------------------------------------------------------------- weights

class WeightParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


_TOKEN = re.compile(r"\s*(sig\(|const\(|xi|x|X|,|\)|\*|[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)")


def parse_weight(expr: str) -> list[tuple[str, float]]:
    """Parse ``term ('*' term)*`` into ``[(var_or_'const', value), ...]``."""
    tokens: list[tuple[str, int]] = []
    pos = 0
    stripped = expr.rstrip()
    while pos < len(stripped):
        m = _TOKEN.match(stripped, pos)
        if not m:
            raise WeightParseError(f"unexpected character {stripped[pos]!r}", pos)
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    tokens.append(("<end>", len(stripped)))

    factors: list[tuple[str, float]] = []
    i = 0

    def expect(pred, what):
        nonlocal i
        tok, p = tokens[i]
        if not pred(tok):
            raise WeightParseError(f"expected {what}, found {tok!r}", p)
        i += 1
        return tok

    def number(tok):
        try:
            float(tok)
            return True
        except ValueError:
            return False

    while True:
        head = expect(lambda t: t in ("sig(", "const("), "'sig(' or 'const('")
        if head == "sig(":
            var = expect(lambda t: t in ("x", "xi", "X"), "a variable x, xi or X")
            expect(lambda t: t == ",", "','")
            s = float(expect(number, "an exponent"))
            expect(lambda t: t == ")", "')'")
            factors.append((var, s))
        else:
            p = tokens[i][1]
            c = float(expect(number, "a constant"))
            if not c > 0:
                raise WeightParseError("constant must be positive", p)
            expect(lambda t: t == ")", "')'")
            factors.append(("const", c))
        tok, p = tokens[i]
        if tok == "<end>":
            return factors
        expect(lambda t: t == "*", "'*' or end of input")


def _weight_callable(factors: list[tuple[str, float]]) -> Callable:
    def fn(x, xi=None):
        x = np.asarray(x, dtype=float)
        xi = np.zeros_like(x) if xi is None else np.asarray(xi, dtype=float)
        out = np.ones(np.broadcast(x, xi).shape)
        for var, s in factors:
            if var == "const":
                out = out * s
            elif var == "x":
                out = out * (1 + x ** 2) ** (s / 2)
            elif var == "xi":
                out = out * (1 + xi ** 2) ** (s / 2)
            else:
                out = out * (1 + x ** 2 + xi ** 2) ** (s / 2)
        return out
    return fn


@dataclass(frozen=True, eq=False)
class WeightFn:
    """A positive weight sampled on a lattice, together with its formula.

    ``fn(x, xi)`` evaluates the weight anywhere, so the same weight can be
    resampled on other lattices or at dilated arguments.  ``domain`` is
    ``'phase'`` or ``'config'``.
    """

    grid: GridSpec
    values: np.ndarray
    expr: str
    fn: Callable = field(repr=False)
    domain: str = "phase"
    spacing: tuple[float, float] = (0.0, 0.0)
    witness: Optional["WeightFn"] = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if not np.all(vals > 0) or not np.all(np.isfinite(vals)):
            raise ValueError("weights must be positive and finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def on(self, spacing: tuple[float, float]) -> "WeightFn":
        """Resample the same formula on another phase lattice."""
        return _sample_weight(self.grid, self.expr, self.fn, "phase", spacing, self.witness)

    def transformed(self, expr: str, fn: Callable) -> "WeightFn":
        return _sample_weight(self.grid, expr, fn, self.domain, self.spacing, None)


def _sample_weight(grid, expr, fn, domain, spacing, witness=None) -> WeightFn:
    if domain == "config":
        vals = fn(grid.x)
        spacing = (grid.dx, 0.0)
    else:
        x, xi = np.meshgrid(grid.points(spacing[0]), grid.points(spacing[1]), indexing="ij")
        vals = fn(x, xi)
    return WeightFn(grid, vals, expr, fn, domain, tuple(spacing), witness)


def weight_eval(expr: str, grid: GridSpec, spacing: Optional[tuple[float, float]] = None,
                domain: str = "phase", witness: Optional[WeightFn] = None) -> WeightFn:
    """Evaluate a weight expression such as ``"sig(x,1)*sig(xi,-1)"``."""
    factors = parse_weight(expr)
    if domain == "config" and any(v == "xi" for v, _ in factors):
        raise ValueError("a configuration-space weight cannot depend on xi")
    if domain not in ("phase", "config"):
        raise ValueError(f"unknown weight domain {domain!r}")
    spacing = grid.symbol_spacing if spacing is None else spacing
    return _sample_weight(grid, expr, _weight_callable(factors), domain, spacing, witness)


def check_moderate(omega: WeightFn, v: WeightFn, cap: float = 1e3,
                   growth: float = 1.5) -> tuple[bool, float]:
    """Grid estimate of ``C = sup omega(x + y) / (omega(x) v(y))``.

    Pairs are subsampled with stride ``max(1, N // 16)`` per axis and ``x + y``
    is clipped to the lattice box.  Since every finite grid gives a finite
    supremum, unboundedness is detected by comparing against the supremum over
    the half-size box: moderation is reported only when ``C <= cap`` and the
    estimate does not grow by more than ``growth`` between the two boxes.
    """
    if omega.grid != v.grid or omega.domain != v.domain:
        raise ValueError("weights live on different grids")
    grid = omega.grid
    stride = max(1, grid.N // 16)
    idx = np.arange(0, grid.N, stride)
    if omega.domain == "config":
        pts = [grid.x[idx]]
        half_box = [grid.L]
        lo_hi = [(grid.x[0], grid.x[-1])]
    else:
        h1, h2 = omega.spacing
        p1, p2 = grid.points(h1), grid.points(h2)
        g1, g2 = np.meshgrid(p1[idx], p2[idx], indexing="ij")
        pts = [g1.ravel(), g2.ravel()]
        half_box = [abs(p1[0]), abs(p2[0])]
        lo_hi = [(p1[0], p1[-1]), (p2[0], p2[-1])]

    def evaluate(f, coords):
        return f(*coords) if len(coords) == 2 else f(coords[0])

    def sup(mask):
        X = [c[mask] for c in pts]
        num_args = [np.clip(a[:, None] + b[None, :], lo, hi) for a, b, (lo, hi) in zip(X, X, lo_hi)]
        ratio = evaluate(omega.fn, num_args) / (evaluate(omega.fn, X)[:, None] * evaluate(v.fn, X)[None, :])
        return float(np.max(ratio))

    everything = np.ones(pts[0].shape, dtype=bool)
    inner = np.all([np.abs(c) <= hb / 2 for c, hb in zip(pts, half_box)], axis=0)
    c_full = sup(everything)
    c_half = sup(inner)
    ok = bool(np.isfinite(c_full) and c_full <= cap and c_full <= growth * c_half)
    return ok, c_full


# ---------------------------------------------------------------- symmetries

def _reflect_axis(v: np.ndarray, axis: int) -> np.ndarray:
    """Index map ``k' -> -k'`` on a centered periodic grid."""
    return np.roll(np.flip(v, axis=axis), 1, axis=axis)


def symmetry_transform(a: PhaseFn, kind: str, t: Optional[float] = None) -> PhaseFn:
    """Elementary symmetries of a phase-space function.

    ``reflect`` a(-X); ``conj``; ``torsion`` conj(a(x, -xi)); ``tilde``
    conj(a(-X)); ``dilate`` a(tX), resampled by trigonometric interpolation and
    set to zero where ``tX`` leaves the lattice box.
    """
    v = a.values
    if kind == "reflect":
        return a.with_values(_reflect_axis(_reflect_axis(v, 0), 1))
    if kind == "conj":
        return a.with_values(np.conj(v))
    if kind == "torsion":
        return a.with_values(np.conj(_reflect_axis(v, 1)))
    if kind == "tilde":
        return a.with_values(np.conj(_reflect_axis(_reflect_axis(v, 0), 1)))
    if kind == "dilate":
        if t is None or t == 0:
            raise ValueError("dilation needs a nonzero factor")
        n = a.grid.N
        h1, h2 = a.spacing
        Mx = trig_interp_matrix(n, h1, t * a.grid.points(h1))
        Me = trig_interp_matrix(n, h2, t * a.grid.points(h2))
        return a.with_values(Mx @ v @ Me.T)
    raise ValueError(f"unknown symmetry {kind!r}")


# ---------------------------------------------------------------- exponents

@dataclass(frozen=True)
class ExtExponent:
    """Exponent in ``[1, inf]``, exact rational or symbolic infinity."""

    value: Optional[Fraction]   # None means infinity

    def __post_init__(self):
        if self.value is not None:
            object.__setattr__(self, "value", Fraction(self.value))
            if self.value < 1:
                raise ValueError(f"exponent must be at least 1, got {self.value}")

    @classmethod
    def of(cls, p: Union["ExtExponent", int, str, Fraction, float]) -> "ExtExponent":
        if isinstance(p, ExtExponent):
            return p
        if isinstance(p, str):
            s = p.strip().lower()
            if s in ("inf", "infinity", "oo", "∞"):
                return cls(None)
            return cls(Fraction(s))
        if isinstance(p, float):
            if np.isinf(p):
                return cls(None)
            return cls(Fraction(p).limit_denominator(10 ** 6))
        return cls(Fraction(p))

    @property
    def is_inf(self) -> bool:
        return self.value is None

    @property
    def recip(self) -> Fraction:
        return Fraction(0) if self.value is None else 1 / self.value

    def conj(self) -> "ExtExponent":
        r = 1 - self.recip
        return ExtExponent(None) if r == 0 else ExtExponent(1 / r)

    def __float__(self) -> float:
        return float("inf") if self.value is None else float(self.value)

    def __str__(self) -> str:
        return "inf" if self.value is None else str(self.value)


# ---------------------------------------------------------------- file format

def write_gfn(path, fn: Union[ConfigFn, PhaseFn]) -> None:
    """Write a JSON header line followed by little-endian complex128 samples."""
    kind = "phase" if isinstance(fn, PhaseFn) else "config"
    header = {"kind": kind, "d": fn.grid.d, "N": fn.grid.N, "L": fn.grid.L,
              "count": int(fn.values.size)}
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8") + b"\n")
        fh.write(np.ascontiguousarray(fn.values, dtype="<c16").tobytes())


def read_gfn(path) -> Union[ConfigFn, PhaseFn]:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        raw = fh.read()
    grid = make_grid(header["d"], header["N"], header["L"])
    vals = np.frombuffer(raw, dtype="<c16")
    if vals.size != header["count"]:
        raise ValueError(f"header announces {header['count']} values, file holds {vals.size}")
    if header["kind"] == "config":
        return ConfigFn(grid, vals.astype(complex))
    if header["kind"] == "phase":
        return PhaseFn(grid, vals.astype(complex).reshape(grid.N, grid.N))
    raise ValueError(f"unknown kind {header['kind']!r}")
