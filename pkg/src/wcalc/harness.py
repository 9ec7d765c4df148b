"""Verification harness: configuration, random ensembles, exact exponent and
weight admissibility checkers, the identity and inequality suites, and JSON
reporting."""
from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .phasespace import (
    ConfigFn, ExtExponent, GridSpec, PhaseFn, WeightFn, gaussian, l2_inner, l2_norm,
    make_grid, parse_weight, sympl_fourier, symmetry_transform, weight_eval,
)
from .phasespace import _weight_callable
from .products import (
    convolve, dilated_conv_pair, dilation_pairs, odd_monomial, pointwise_domination,
    smooth_one, twisted_convolve, twisted_stft_oracle, weyl_product, weyl_product_t,
    weyl_stft_oracle,
)
from .quantize import A_inv, A_op, OperatorMatrix, op_t, toeplitz
from .spectral import (
    TemperedSpace, l2_space, make_space, polar_decompose, polar_reconstruct,
    schatten_duality_pair, schatten_norm, symbol_equivalences,
)
from .transforms import (
    MixedNormSpec, calculus_transform, m2_partial_norm, mixed_norm, stft_matrix,
    sympl_mod_norm, sympl_stft, wigner_stft_norms, wigner_t,
)

__all__ = [
    "SuiteConfig", "CheckResult", "random_ensemble", "check_exponents_weyl",
    "check_exponents_twist", "check_exponents_young", "check_exponents_twisted_young",
    "check_exponents_twisted_lp", "check_weight_condition", "WEIGHT_KIND_TOKENS", "weight_infconv",
    "weight_infconv_bruteforce", "weight4_from_expr", "identity_checks", "inequality_checks",
    "run_identity_suite", "run_inequality_suite", "emit_report", "report_bytes",
]

_SQ2PI = np.sqrt(2 * np.pi)
_SEED_MOD = 2 ** 64


# ---------------------------------------------------------------- configuration

@dataclass
class SuiteConfig:
    """Grid sizes, ensemble seed and count, tolerance overrides, check
    selection and weight expressions per check.

    ``count`` overrides every check's default trial count; ``tolerances`` maps
    check names (or ``"*"`` for all) to replacement tolerances.
    """

    N: int = 64
    L: float = 6.0
    coarse_N: int = 32
    coarse_L: float = 5.0
    seed: int = 42
    count: Optional[int] = None
    tolerances: dict = field(default_factory=dict)
    checks: Optional[list] = None
    weights: dict = field(default_factory=dict)
    record_time: bool = False

    def __post_init__(self):
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= int(self.seed) < _SEED_MOD:
            raise ValueError("seed must be an unsigned 64-bit integer")
        self.seed = int(self.seed)
        if self.count is not None and int(self.count) < 1:
            raise ValueError("count must be positive")
        for name, tol in self.tolerances.items():
            if not float(tol) >= 0:
                raise ValueError(f"tolerance for {name!r} must be nonnegative")
        for name, exprs in self.weights.items():
            for expr in exprs:
                parse_weight(expr)
        if self.N % 4 or self.coarse_N % 4:
            raise ValueError("grid sizes must be multiples of 4")

    @classmethod
    def from_dict(cls, data: dict) -> "SuiteConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "SuiteConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def tolerance(self, name: str, default: float) -> float:
        if name in self.tolerances:
            return float(self.tolerances[name])
        return float(self.tolerances.get("*", default))

    def weights_for(self, name: str, default: Sequence[str]) -> list[str]:
        return list(self.weights.get(name, default))


@dataclass
class CheckResult:
    """Outcome of one named check over all of its trials."""

    name: str
    ref: str
    kind: str
    status: str
    tolerance: float
    trials: int
    seed: int
    max_err: Optional[float] = None
    max_ratio: Optional[float] = None
    detail: dict = field(default_factory=dict)
    wall_time: Optional[float] = None

    def to_dict(self, with_time: bool = False) -> dict:
        d = asdict(self)
        if not with_time:
            d.pop("wall_time")
        return d


# ---------------------------------------------------------------- ensembles

def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) % _SEED_MOD))


def _gauss_mod(rng: np.random.Generator, grid: GridSpec) -> ConfigFn:
    """Unit-norm ``exp(-x^2 / (2 s^2))`` times a random trigonometric polynomial
    of degree ``N/4``; ``s^2 = L/8`` keeps both tails below the box edges."""
    x = grid.x
    deg = grid.N // 4
    k = np.arange(-deg, deg + 1)
    c = (rng.standard_normal(k.size) + 1j * rng.standard_normal(k.size)) / np.sqrt(2 * k.size)
    f = ConfigFn(grid, np.exp(-x ** 2 / (grid.L / 4)) * (np.exp(0.5j * grid.deta * np.outer(x, k)) @ c))
    return f * (1 / l2_norm(f))


def _sigma_pos(rng: np.random.Generator, grid: GridSpec, k: int = 3) -> PhaseFn:
    """``A^{-1}`` of a random positive semi-definite kernel of rank ``k``, unit L2 norm."""
    Phi = np.array([_gauss_mod(rng, grid).values for _ in range(k)]).T
    B = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    U = Phi @ (B @ B.conj().T) @ Phi.conj().T
    return A_inv(OperatorMatrix(grid, U / (np.linalg.norm(U) * grid.dx)))


def _weyl_pos(rng: np.random.Generator, grid: GridSpec, k: int = 3) -> PhaseFn:
    """``(2 pi)^{1/2} sum c_i W_{f_i, f_i}`` with ``c_i > 0``: a positive Weyl operator."""
    out = None
    for _ in range(k):
        f = _gauss_mod(rng, grid)
        w = wigner_t(f, f) * (_SQ2PI * rng.uniform(0.2, 1.0))
        out = w if out is None else out + w
    return out


_KINDS = {
    "gauss_mod": _gauss_mod,
    "rank_one": lambda rng, grid: wigner_t(_gauss_mod(rng, grid), _gauss_mod(rng, grid)),
    "sigma_pos": _sigma_pos,
    "weyl_pos": _weyl_pos,
}


def random_ensemble(seed: int, kind: str, count: int, grid: GridSpec,
                    rng: Optional[np.random.Generator] = None) -> list:
    """``count`` seeded members of one ensemble kind: ``gauss_mod``, ``rank_one``,
    ``sigma_pos`` or ``weyl_pos``."""
    if kind not in _KINDS:
        raise ValueError(f"unknown ensemble kind {kind!r}")
    rng = _generator(seed) if rng is None else rng
    return [_KINDS[kind](rng, grid) for _ in range(int(count))]


# ---------------------------------------------------------------- exponent checkers

def _recips(*ps) -> list[Fraction]:
    return [ExtExponent.of(p).recip for p in ps]


def _algebra_exponents(p0, p1, p2, q0, q1, q2, twisted: bool) -> bool:
    r = _recips(p0, p1, p2, q0, q1, q2)
    P = r[1] + r[2] - r[0]
    Q = r[4] + r[5] - r[3]
    if P != 1 - Q:
        return False
    lo, hi = (Q, P) if twisted else (P, Q)
    return lo >= 0 and all(lo <= v <= hi for v in r)


def check_exponents_weyl(p0, p1, p2, q0, q1, q2) -> bool:
    """Exact admissibility of modulation exponents for the Weyl product."""
    return _algebra_exponents(p0, p1, p2, q0, q1, q2, twisted=False)


def check_exponents_twist(p0, p1, p2, q0, q1, q2) -> bool:
    """Exact admissibility of modulation exponents for twisted convolution
    (the roles of the two bounds are exchanged)."""
    return _algebra_exponents(p0, p1, p2, q0, q1, q2, twisted=True)


def check_exponents_young(p_list: Sequence, r) -> bool:
    """``sum 1/p_j = (N - 1) + 1/r`` in exact arithmetic."""
    if not p_list:
        return False
    rec = _recips(*p_list)
    return sum(rec) == len(rec) - 1 + ExtExponent.of(r).recip


def check_exponents_twisted_young(p1, p2, p) -> bool:
    """``p1, p2 <= p`` and ``max(1/p, 1/p') <= 1/p1 + 1/p2 - 1/p <= 1``."""
    r1, r2, r = _recips(p1, p2, p)
    if r1 < r or r2 < r:
        return False
    s = r1 + r2 - r
    return max(r, 1 - r) <= s <= 1


def check_exponents_twisted_lp(p, q) -> bool:
    """``q <= min(p, p')``, i.e. the pair ``(p, q)`` in the twisted Young bound."""
    return check_exponents_twisted_young(p, q, p)


# ---------------------------------------------------------------- weight checkers

def _phase_weight(w) -> Callable:
    """Callable ``g(P)`` of points ``P[..., 2]`` from a WeightFn, expression or callable."""
    if isinstance(w, WeightFn):
        fn = w.fn
    elif isinstance(w, str):
        fn = _weight_callable(parse_weight(w))
    elif callable(w):
        fn = w
    else:
        raise TypeError(f"cannot use {type(w).__name__} as a weight")
    return lambda P: np.asarray(fn(P[..., 0], P[..., 1]), dtype=float)


def _double_weight(w) -> Callable:
    """Callable ``g(P, Q)`` for a weight on the doubled phase space.

    A pair ``(w1, w2)`` is the tensor product ``w1(P) w2(Q)``; a single phase
    weight depends on ``P`` only; a callable takes ``(x, xi, y, eta)``.
    """
    if isinstance(w, (tuple, list)):
        g1, g2 = _phase_weight(w[0]), _phase_weight(w[1])
        return lambda P, Q: g1(P) * g2(Q)
    if isinstance(w, (WeightFn, str)):
        g = _phase_weight(w)
        return lambda P, Q: g(P)
    return lambda P, Q: np.asarray(w(P[..., 0], P[..., 1], Q[..., 0], Q[..., 1]), dtype=float)


def _box(npts: int, R: float, nvec: int) -> list[np.ndarray]:
    c = np.linspace(-R, R, npts)
    axes = np.meshgrid(*([c] * (2 * nvec)), indexing="ij")
    return [np.stack([axes[2 * i].ravel(), axes[2 * i + 1].ravel()], axis=-1) for i in range(nvec)]


def _dilation_relation(t, j) -> float:
    return float(sum((-1) ** int(jj) * float(tt) ** -2 for tt, jj in zip(t, j)))


# compact kind tokens kept for callers of the original interface
WEIGHT_KIND_TOKENS = {"vikt1": "weyl", "vikt2": "twisted", "vikt3": "submultiplicative",
                      "wc1": "dilated"}


def check_weight_condition(kind: str, weights: Sequence, dilations: Optional[Sequence] = None,
                           signs: Optional[Sequence] = None, radius: float = 2.0,
                           points: int = 7, growth: float = 1.1) -> tuple[bool, float]:
    """Grid estimate of the constant in a weight inequality.

    ``weyl`` / ``twisted``: ``w0(X, Y) <= C w1(X - Y + Z, Z) w2(X + Z, Y - Z)``
    (``twisted`` swaps the arguments of ``w2`` to ``(Y - Z, X + Z)``); weights on
    the doubled phase space.  ``submultiplicative``: ``w0(X1 + X2) <= C w1(X1) w2(X2)``.
    ``dilated``: ``w(X1 + X2) <= C w1(t1 X1) w2(t2 X2)`` with dilations ``(t1, t2)``
    and signs ``(j1, j2)`` that must satisfy ``sum (-1)^j t^-2 = 1``.
    The short kind tokens of ``WEIGHT_KIND_TOKENS`` are accepted as well.

    The ratio is maximized over ``points`` samples per coordinate on the boxes
    of radius ``radius``, ``4 radius`` and ``16 radius``.  The condition is
    accepted when the estimate is finite and grows by at most ``growth``
    between the two largest boxes, which detects polynomial growth of order
    about 0.07 and faster.
    """
    kind = WEIGHT_KIND_TOKENS.get(kind, kind)
    if kind in ("weyl", "twisted"):
        w0, w1, w2 = (_double_weight(w) for w in weights)

        def ratio(R):
            X, Y, Z = _box(points, R, 3)
            second = w2(X + Z, Y - Z) if kind == "weyl" else w2(Y - Z, X + Z)
            return w0(X, Y) / (w1(X - Y + Z, Z) * second)
    elif kind == "submultiplicative":
        w0, w1, w2 = (_phase_weight(w) for w in weights)

        def ratio(R):
            X1, X2 = _box(points, R, 2)
            return w0(X1 + X2) / (w1(X1) * w2(X2))
    elif kind == "dilated":
        if dilations is None or signs is None or len(dilations) != 2 or len(signs) != 2:
            raise ValueError("dilated condition needs two dilations and two signs")
        if abs(_dilation_relation(dilations, signs) - 1) > 1e-12:
            return False, float("inf")
        w0, w1, w2 = (_phase_weight(w) for w in weights)
        t1, t2 = (float(t) for t in dilations)

        def ratio(R):
            X1, X2 = _box(points, R, 2)
            return w0(X1 + X2) / (w1(t1 * X1) * w2(t2 * X2))
    else:
        raise ValueError(f"unknown weight condition {kind!r}")
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        sups = [float(np.max(ratio(radius * s))) for s in (1, 4, 16)]
    c_est = max(sups)
    ok = bool(np.isfinite(c_est) and sups[2] <= growth * sups[1])
    return ok, c_est


# ---------------------------------------------------------------- infimal convolution

def _infconv_setup(weights: Sequence[WeightFn], dilations: Sequence, signs: Sequence):
    n_f = len(weights)
    if n_f < 2 or len(dilations) != n_f or len(signs) != n_f:
        raise ValueError("one dilation and one sign per weight, at least two weights")
    if any(float(t) == 0 for t in dilations):
        raise ValueError("dilations must be nonzero")
    if abs(_dilation_relation(dilations, signs) - 1) > 1e-12:
        raise ValueError("dilations violate sum (-1)^j t^-2 = 1")
    rho_m2 = 1 - (-1) ** int(signs[-1]) * float(dilations[-1]) ** -2
    if rho_m2 <= 0:
        raise ValueError("no real rho for the last dilation")
    rho = rho_m2 ** -0.5
    grid, spacing = weights[0].grid, weights[0].spacing
    xs, es = grid.points(spacing[0]), grid.points(spacing[1])
    X, E = np.meshgrid(xs, es, indexing="ij")
    scaled = [float(t) / rho for t in dilations[:-1]]
    logs = [np.log(w.fn(s * X, s * E)) for w, s in zip(weights[:-1], scaled)]
    return grid, spacing, scaled, logs


def _minplus(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """``min_Y A(X - Y) + B(Y)`` over lattice ``Y`` with ``X - Y`` inside the box."""
    n = A.shape[0]
    h = n // 2
    out = np.full(A.shape, np.inf)
    for p in range(n):
        dp = p - h
        xs = slice(max(0, dp), min(n, n + dp))
        axs = slice(max(0, -dp), min(n, n - dp))
        for q in range(n):
            dq = q - h
            ys = slice(max(0, dq), min(n, n + dq))
            ays = slice(max(0, -dq), min(n, n - dq))
            np.minimum(out[xs, ys], A[axs, ays] + B[p, q], out=out[xs, ys])
    return out


def weight_infconv(weights: Sequence[WeightFn], dilations: Sequence, signs: Sequence) -> WeightFn:
    """``w(X) = inf prod_k w_k(t_k' X_k)`` over splittings ``X = X_1 + ... + X_{N-1}``.

    ``weights`` are the ``N`` factor weights, ``dilations`` the ``t_k`` and
    ``signs`` the ``j_k``; ``rho`` solves ``rho^-2 + (-1)^{j_N} t_N^-2 = 1`` and
    ``t_k' = t_k / rho``.  Lattice values come from repeated pairwise min-plus
    passes in the log domain (a single pass for three factors).  The returned
    ``fn`` evaluates anywhere by minimizing over lattice choices of
    ``X_2 + ... + X_{N-1}``.
    """
    grid, spacing, scaled, logs = _infconv_setup(weights, dilations, signs)
    acc = logs[0]
    for L in logs[1:]:
        acc = _minplus(acc, L)
    vals = np.exp(acc)
    first = weights[0].fn
    s1 = scaled[0]
    xs, es = grid.points(spacing[0]), grid.points(spacing[1])
    if len(logs) == 1:
        fn = lambda x, xi: first(s1 * np.asarray(x, float), s1 * np.asarray(xi, float))
    else:
        rest = logs[1]
        for L in logs[2:]:
            rest = _minplus(rest, L)
        Y1, Y2 = np.meshgrid(xs, es, indexing="ij")
        Y1, Y2, rest = Y1.ravel(), Y2.ravel(), rest.ravel()

        def fn(x, xi):
            x, xi = np.broadcast_arrays(np.asarray(x, float), np.asarray(xi, float))
            flat_x, flat_e = x.ravel(), xi.ravel()
            out = np.empty(flat_x.size)
            for i in range(flat_x.size):
                lw = np.log(first(s1 * (flat_x[i] - Y1), s1 * (flat_e[i] - Y2)))
                out[i] = np.exp(np.min(lw + rest))
            return out.reshape(x.shape)
    expr = "infconv(" + ", ".join(w.expr for w in weights) + ")"
    return WeightFn(grid, vals, expr, fn, "phase", tuple(spacing))


def weight_infconv_bruteforce(weights: Sequence[WeightFn], dilations: Sequence,
                              signs: Sequence) -> np.ndarray:
    """Exhaustive minimum over all lattice splittings with every part inside the box."""
    grid, spacing, scaled, logs = _infconv_setup(weights, dilations, signs)
    n = grid.N
    h = n // 2
    idx = np.arange(n)
    parts = len(logs)
    best = np.full((n, n), np.inf)
    # enumerate X_1..X_{parts-1}; the last part is X minus their sum
    for combo in np.ndindex(*([n * n] * (parts - 1))):
        ks = [divmod(c, n) for c in combo]
        total = sum(logs[i][k] for i, k in enumerate(ks))
        sk = sum(k[0] - h for k in ks)
        sm = sum(k[1] - h for k in ks)
        # last part index: X - sum; valid where inside the box
        li = idx[:, None] - sk
        lj = idx[None, :] - sm
        ok = (li >= 0) & (li < n) & (lj >= 0) & (lj < n)
        vals = np.where(ok, logs[-1][np.clip(li, 0, n - 1), np.clip(lj, 0, n - 1)] + total, np.inf)
        best = np.minimum(best, vals)
    return np.exp(best)


# ---------------------------------------------------------------- check plumbing

def _rel(a, b) -> float:
    a = getattr(a, "values", getattr(a, "entries", a))
    b = getattr(b, "values", getattr(b, "entries", b))
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))) / np.max(np.abs(b)))


def _check_of(s: PhaseFn) -> PhaseFn:
    return symmetry_transform(s, "reflect")


def _config_check(f: ConfigFn) -> ConfigFn:
    return f.with_values(np.roll(f.values[::-1], 1))


@lru_cache(maxsize=8)
def _grid(N: int, L: float) -> GridSpec:
    return make_grid(1, N, L)


@lru_cache(maxsize=16)
def _space(N: int, L: float, expr: Optional[str]) -> TemperedSpace:
    grid = _grid(N, L)
    if expr is None:
        return l2_space(grid)
    return make_space(weight_eval(expr, grid))


@dataclass(frozen=True)
class _Ctx:
    cfg: SuiteConfig
    name: str

    @property
    def grid(self) -> GridSpec:
        return _grid(self.cfg.N, self.cfg.L)

    @property
    def coarse(self) -> GridSpec:
        return _grid(self.cfg.coarse_N, self.cfg.coarse_L)

    def space(self, expr: Optional[str], grid: Optional[GridSpec] = None) -> TemperedSpace:
        g = self.grid if grid is None else grid
        return _space(g.N, g.L, expr)

    def weights(self, default: Sequence[str]) -> list[str]:
        return self.cfg.weights_for(self.name, default)


@dataclass(frozen=True)
class _Check:
    name: str
    ref: str
    kind: str            # identity | positivity | domination | bound | ratio
    tol: float
    trials: int
    fn: Callable
    skip: Optional[str] = None


def _trial_seeds(seed: int, count: int) -> list[int]:
    return [(seed + i) % _SEED_MOD for i in range(count)]


def _threads() -> Optional[int]:
    raw = os.environ.get("WCALC_THREADS")
    if raw is None:
        return None
    n = int(raw)
    if n < 1:
        raise ValueError("WCALC_THREADS must be a positive integer")
    return n


def _run_trials(fn: Callable, ctx: _Ctx, seeds: list[int]) -> list:
    workers = _threads()
    if workers == 1 or len(seeds) == 1:
        return [fn(ctx, _generator(s)) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: fn(ctx, _generator(s)), seeds))


def _run_check(chk: _Check, cfg: SuiteConfig) -> CheckResult:
    tol = cfg.tolerance(chk.name, chk.tol)
    # single-trial checks are deterministic; a count override does not multiply them
    trials = chk.trials if cfg.count is None or chk.trials == 1 else int(cfg.count)
    base = dict(name=chk.name, ref=chk.ref, kind=chk.kind, tolerance=tol, seed=cfg.seed)
    ctx = _Ctx(cfg, chk.name)
    start = time.perf_counter()
    try:
        if chk.skip:
            res = CheckResult(status="skip", trials=0, detail={"reason": chk.skip}, **base)
        elif chk.kind == "ratio":
            res = _ratio_outcome(chk, ctx, trials, tol)
        else:
            errs = _run_trials(chk.fn, ctx, _trial_seeds(cfg.seed, trials))
            err = float(max(errs))
            res = CheckResult(status="pass" if err <= tol else "fail", trials=trials,
                              max_err=err, **base)
    except Exception as exc:                                     # reported, not raised
        res = CheckResult(status="fail", trials=trials,
                          detail={"error": f"{type(exc).__name__}: {exc}"}, **base)
    if cfg.record_time:
        res.wall_time = time.perf_counter() - start
    return res


def _ratio_outcome(chk: _Check, ctx: _Ctx, trials: int, tol: float) -> CheckResult:
    """Ratios on the configured grid and on a grid with half as many points
    (same box); the check passes when both are finite, the larger is within
    ``tol`` times the smaller, and any explicit bound holds."""
    cfg = ctx.cfg
    out = chk.fn(ctx, trials)
    base = dict(name=chk.name, ref=chk.ref, kind=chk.kind, tolerance=tol, seed=cfg.seed,
                trials=trials)
    if out is None:
        return CheckResult(status="skip", detail={"reason": "no admissible parameters"}, **base)
    fine, coarse, bound, detail = out
    finite = np.isfinite(fine) and np.isfinite(coarse) and fine > 0 and coarse > 0
    stability = max(fine, coarse) / min(fine, coarse) if finite else float("inf")
    ok = finite and stability < tol
    detail = dict(detail, ratio_N=fine, ratio_half_N=coarse, stability=stability)
    if bound is not None:
        detail["bound"] = bound
        ok = ok and max(fine, coarse) <= bound * (1 + 1e-8)
    return CheckResult(status="pass" if ok else "fail", max_ratio=max(fine, coarse),
                       detail=detail, **base)


def _select(checks: list[_Check], names: Optional[Sequence[str]]) -> list[_Check]:
    if names is None:
        return checks
    by_name = {c.name: c for c in checks}
    return [by_name[n] for n in names if n in by_name]


def _run_suite(checks: list[_Check], cfg: SuiteConfig) -> list[CheckResult]:
    return [_run_check(c, cfg) for c in _select(checks, cfg.checks)]


# ---------------------------------------------------------------- identity checks

def _rank_one(ctx: _Ctx, rng, grid: Optional[GridSpec] = None) -> PhaseFn:
    g = ctx.grid if grid is None else grid
    return _KINDS["rank_one"](rng, g)


def _pair(ctx, rng, grid=None):
    return _rank_one(ctx, rng, grid), _rank_one(ctx, rng, grid)


def _fourier_involution(ctx, rng):
    a = _rank_one(ctx, rng)
    return _rel(sympl_fourier(sympl_fourier(a)), a)


def _fourier_parseval(ctx, rng):
    a = _rank_one(ctx, rng)
    return abs(sympl_fourier(a).norm() - a.norm()) / a.norm()


def _fourier_gaussian(ctx, rng):
    g = ctx.grid
    a = PhaseFn(g, np.zeros((g.N, g.N)), g.symbol_spacing)
    x, e = a.coords
    G = a.with_values(np.exp(-x ** 2 - e ** 2))
    return _rel(sympl_fourier(G), G)


def _weyl_routes(ctx, rng):
    a, b = _pair(ctx, rng)
    return _rel(weyl_product(a, b, "twist"), weyl_product(a, b, "operator"))


def _twist_fourier(ctx, rng):
    a, b = _pair(ctx, rng)
    F = sympl_fourier
    ref = F(twisted_convolve(a, b))
    return max(_rel(twisted_convolve(F(a), b), ref), _rel(twisted_convolve(_check_of(a), F(b)), ref))


def _weyl_fourier(ctx, rng):
    a, b = _pair(ctx, rng)
    F = sympl_fourier
    return _rel(twisted_convolve(F(a), F(b)) * (2 * np.pi) ** -0.5, F(weyl_product(a, b)))


def _coarse_window(rng, grid: GridSpec) -> PhaseFn:
    a = PhaseFn(grid, np.zeros((grid.N, grid.N)), grid.symbol_spacing)
    x, e = a.coords
    c1, c2, w = rng.uniform(-0.3, 0.3, 3)
    return a.with_values(np.exp(-(x - c1) ** 2 - (e - c2) ** 2 + 1j * w * x))


def _sympl_stft_swap(general: bool):
    """Even windows (centered Gaussians of random widths) satisfy the swap with
    the transformed window itself; a general window needs it reflected."""
    def fn(ctx, rng):
        g = ctx.coarse
        a = _rank_one(ctx, rng, g)
        if general:
            phi = _coarse_window(rng, g)
            return _stft_swap_err(a, phi, _check_of(sympl_fourier(phi)))
        x, e = a.coords
        s1, s2 = rng.uniform(0.5, 2.0, 2)
        phi = a.with_values(np.exp(-x ** 2 / s1 - e ** 2 / s2))
        return _stft_swap_err(a, phi, sympl_fourier(phi))
    return fn


def _stft_swap_err(a: PhaseFn, phi: PhaseFn, window: PhaseFn) -> float:
    lhs = sympl_stft(sympl_fourier(a), window).values
    V = sympl_stft(a, phi).values.transpose(2, 3, 0, 1)
    x, e = a.coords
    X1, X2 = x[:, :, None, None], e[:, :, None, None]
    Y1, Y2 = x[None, None], e[None, None]
    return _rel(lhs, np.exp(2j * (X1 * Y2 - Y1 * X2)) * V)


def _interior_points(rng, n: int, count: int = 6):
    return [tuple(int(v) for v in rng.integers(n // 4 + 2, 3 * n // 4 - 2, 4)) for _ in range(count)]


def _weyl_stft_product(ctx, rng):
    g = ctx.coarse
    a1, a2 = _pair(ctx, rng, g)
    p1, p2 = _coarse_window(rng, g), _coarse_window(rng, g)
    pts = _interior_points(rng, g.N)
    V = sympl_stft(weyl_product(a1, a2), weyl_product(p1, p2) * np.pi).values
    lhs = np.array([V[p] for p in pts])
    return _rel(weyl_stft_oracle(a1, a2, p2, p1, pts), lhs)


def _twisted_stft_product(ctx, rng):
    g = ctx.coarse
    a1, a2 = _pair(ctx, rng, g)
    p1, p2 = _coarse_window(rng, g), _coarse_window(rng, g)
    pts = _interior_points(rng, g.N)
    V = sympl_stft(twisted_convolve(a1, a2), twisted_convolve(p1, p2) * 0.5).values
    lhs = np.array([V[p] for p in pts])
    return _rel(twisted_stft_oracle(a1, a2, p2, p1, pts), lhs)


def _reflect_index(n: int) -> np.ndarray:
    return (-np.arange(n)) % n


def _A_composition(ctx, rng):
    a, b = _pair(ctx, rng)
    return _rel(A_op(twisted_convolve(a, b)), A_op(a) @ A_op(b))


def _A_reflection(ctx, rng):
    a = _rank_one(ctx, rng)
    R = _reflect_index(a.grid.N)
    return _rel(A_op(_check_of(a)), A_op(a).entries[R][:, R])


def _A_fourier_flip(ctx, rng):
    a = _rank_one(ctx, rng)
    R = _reflect_index(a.grid.N)
    return _rel(A_op(sympl_fourier(a)), A_op(a).entries[R])


def _A_fourier_weyl(ctx, rng):
    a = _rank_one(ctx, rng)
    return _rel(A_op(sympl_fourier(a)).entries, _SQ2PI * op_t(a).entries)


def _A_adjoint(ctx, rng):
    a = _rank_one(ctx, rng)
    return _rel(A_op(symmetry_transform(a, "tilde")).entries, A_op(a).entries.conj().T)


def _A_unitary(ctx, rng):
    a = _rank_one(ctx, rng) + _rank_one(ctx, rng) * 0.5
    return abs(A_op(a).hs_norm() - a.norm()) / a.norm()


def _twist_associative(ctx, rng):
    a, b = _pair(ctx, rng)
    c = _rank_one(ctx, rng)
    tc = twisted_convolve
    return _rel(tc(tc(a, b), c), tc(a, tc(b, c)))


def _twist_pairing(ctx, rng):
    a, b = _pair(ctx, rng)
    c = _rank_one(ctx, rng)
    tc = twisted_convolve
    til = lambda s: symmetry_transform(s, "tilde")
    ref = tc(a, b).inner(c)
    scale = a.norm() * b.norm() * c.norm()
    return max(abs(ref - a.inner(tc(c, til(b)))), abs(ref - b.inner(tc(til(a), c)))) / scale


def _composition(t):
    def fn(ctx, rng):
        a, b = _pair(ctx, rng)
        if t != 0.5:
            a, b = calculus_transform(a, 0.5, t), calculus_transform(b, 0.5, t)
        return _rel(op_t(weyl_product_t(a, b, t), t), op_t(a, t) @ op_t(b, t))
    return fn


def _rank_one_quantization(ctx, rng):
    g = ctx.grid
    f1, f2 = _gauss_mod(rng, g), _gauss_mod(rng, g)
    R = np.outer(f1.values, np.conj(f2.values))
    return max(_rel(op_t(wigner_t(f1, f2, t) * _SQ2PI, t).entries, R) for t in (0.0, 0.5, 1.0))


def _wigner_calculus(ctx, rng):
    g = ctx.grid
    f1, f2 = _gauss_mod(rng, g), _gauss_mod(rng, g)
    W = wigner_t(f1, f2)
    return max(_rel(calculus_transform(W, 0.5, t), wigner_t(f1, f2, t)) for t in (0.0, 0.3, 1.0))


def _calculus_roundtrip(ctx, rng):
    a = _rank_one(ctx, rng)
    s, t = rng.uniform(-1, 1, 2)
    return _rel(calculus_transform(calculus_transform(a, s, t), t, s), a)


def _calculus_operator(ctx, rng):
    a = _rank_one(ctx, rng)
    return max(_rel(op_t(calculus_transform(a, 0.5, t), t), op_t(a, 0.5)) for t in (0.0, 1.0))


_EXPS = ("1", "2", "4", "inf")


def _wigner_stft(ctx, rng):
    g = ctx.grid
    f = _gauss_mod(rng, g)
    p, q = (ExtExponent.of(_EXPS[i]) for i in rng.integers(0, 4, 2))
    order = int(rng.integers(1, 3))
    omega = weight_eval(ctx.weights(["sig(X,1)"])[0], g)
    lhs, rhs = wigner_stft_norms(f, gaussian(g), MixedNormSpec(p, q, order), omega)
    return abs(lhs / rhs - 1)


def _wigner_twist(ctx, rng):
    g = ctx.grid
    f1, f2, g1, g2 = (_gauss_mod(rng, g) for _ in range(4))
    lhs = twisted_convolve(wigner_t(f1, g1), wigner_t(f2, g2))
    return _rel(lhs, wigner_t(f1, g2) * l2_inner(_config_check(f2), g1))


def _window_change(ctx, rng):
    g = ctx.grid
    f, psi, phi = (_gauss_mod(rng, g) for _ in range(3))
    psi = psi * 1.7
    lhs = twisted_convolve(wigner_t(f, _config_check(psi)), wigner_t(psi, _config_check(phi)))
    return _rel(lhs, wigner_t(f, _config_check(phi)) * l2_norm(psi) ** 2)


def _dilated(j, k):
    st = dilation_pairs()[(j, k)]

    def fn(ctx, rng):
        a, b = _pair(ctx, rng)
        lhs, rhs = dilated_conv_pair(a, b, st[0], st[1], j, k)
        return _rel(rhs, lhs)
    return fn


def _gauss_symbol(rng, grid: GridSpec) -> PhaseFn:
    a = PhaseFn(grid, np.zeros((grid.N, grid.N)), grid.symbol_spacing)
    x, e = a.coords
    c1, c2 = rng.uniform(-0.7, 0.7, 2)
    s1, s2 = rng.uniform(1.0, 3.0, 2)
    return a.with_values(np.exp(-(x - c1) ** 2 / s1 - (e - c2) ** 2 / s2))


def _toeplitz_routes(t):
    def fn(ctx, rng):
        g = ctx.grid
        a, h2 = _gauss_symbol(rng, g), _gauss_mod(rng, g)
        h1 = gaussian(g)
        Td = toeplitz(a, h1, h2, "direct").entries
        Tw = toeplitz(a, h1, h2, "weyl", t).entries
        return float(np.linalg.norm(Td - Tw) / np.linalg.norm(Td))
    return fn


def _toeplitz_unit(ctx, rng):
    """Wide box (N = 256, L = 20) so that the truncated unit symbol is flat
    wherever the probe functions live; probes are Gaussians shifted in x and xi."""
    g = _grid(256, 20.0)
    g0 = gaussian(g)
    T = toeplitz(smooth_one(g), g0, g0, "direct")
    errs = []
    for c in (-1.0, 0.0, 1.0):
        for w in (-1.0, 0.0, 1.0):
            f = ConfigFn(g, np.exp(-(g.x - c) ** 2 / 2 + 1j * w * g.x))
            errs.append(l2_norm(T.apply(f) - f) / l2_norm(f))
    return max(errs)


def _partial_stft(ctx, rng):
    g = ctx.coarse
    x = g.x
    c = rng.uniform(-1, 1, 4)
    Fv = np.exp(-(x[:, None] - c[0]) ** 2 / 2 - (x[None, :] - c[1]) ** 2 / 3) \
        * np.exp(1j * (c[2] * x[:, None] + 0.3 * c[3] * x[:, None] * x[None, :]))
    F = PhaseFn(g, Fv, (g.dx, g.dx))
    chi = gaussian(g)
    chi = chi * (1 / l2_norm(chi))
    omega = weight_eval(ctx.weights(["sig(X,1)"])[0], g, g.tf_spacing)
    S = stft_matrix(chi)
    V = S @ Fv @ S.T
    full = np.sqrt(np.sum(np.abs(V * omega.values.reshape(-1)[:, None]) ** 2) * g.cell_tf ** 2)
    return abs(m2_partial_norm(F, omega, chi) / full - 1)


def _hilbert_schmidt(ctx, rng):
    a = _rank_one(ctx, rng) + _rank_one(ctx, rng) * complex(*rng.standard_normal(2))
    want = a.norm() / _SQ2PI
    return abs(schatten_norm(a, 0.5, 2) - want) / want


def _rank_one_schatten(ctx, rng):
    a = _rank_one(ctx, rng)
    return max(abs(schatten_norm(a, 0.5, p) - 1 / _SQ2PI) for p in (1, 2, 4, "inf"))


def _twist_routes(ctx, rng):
    a, b = _pair(ctx, rng)
    return _rel(twisted_convolve(a, b, "A"), twisted_convolve(a, b, "direct"))


def _infconv_oracle(ctx, rng):
    g = _grid(16, ctx.cfg.L)
    s1, s2 = rng.uniform(-2, 2, 2)
    w1 = weight_eval(f"sig(X,{s1:.6f})", g)
    w2 = weight_eval(f"sig(X,{s2:.6f})", g)
    w3 = weight_eval("sig(X,1)", g)
    t = np.sqrt(2.0)
    fast = weight_infconv([w1, w2, w3], [t, 2.0, 2.0], [0, 0, 0]).values
    brute = weight_infconv_bruteforce([w1, w2, w3], [t, 2.0, 2.0], [0, 0, 0])
    return float(np.max(np.abs(fast - brute)) / np.max(brute))


def _mixed_gaussian(ctx, rng):
    g = ctx.grid
    F = PhaseFn(g, np.zeros((g.N, g.N)), g.symbol_spacing)
    x, e = F.coords
    F = F.with_values(np.exp(-x ** 2 - e ** 2))
    spec = MixedNormSpec(ExtExponent.of(2), ExtExponent.of(2), 1)
    return abs(mixed_norm(F, spec) - np.sqrt(np.pi / 2))


def _spaces(ctx, default):
    return [ctx.space(e) for e in ctx.weights(default)]


def _polar_reconstruct(ctx, rng):
    H1, H2 = _spaces(ctx, ["sig(X,1)", "sig(x,-1)"])
    a = _rank_one(ctx, rng) + _rank_one(ctx, rng) * 0.5 + _rank_one(ctx, rng) * 0.25
    data = polar_decompose(a, 0.5, H1, H2, tol=1e-13)
    return _rel(polar_reconstruct(data, 0.5), a)


def _polar_norm(ctx, rng):
    H1, H2 = _spaces(ctx, ["sig(X,1)", "sig(x,-1)"])
    a = _rank_one(ctx, rng) + _rank_one(ctx, rng) * 0.5
    data = polar_decompose(a, 0.5, H1, H2)
    errs = []
    for p in (1, 2, 4, "inf"):
        pe = ExtExponent.of(p)
        lam = data.values
        lp = lam.max() if pe.is_inf else np.sum(lam ** float(pe.value)) ** (1 / float(pe.value))
        s = schatten_norm(a, 0.5, p, H1, H2)
        errs.append(abs(s - lp / _SQ2PI) / s)
    return max(errs)


def _equivalences(ctx, rng):
    H1, H2 = _spaces(ctx, ["sig(X,1)", "sig(x,-1)"])
    a = _rank_one(ctx, rng) + _rank_one(ctx, rng) * 0.5
    p = _EXPS[int(rng.integers(0, 4))]
    return symbol_equivalences(a, p, H1, H2)["spread"]


def identity_checks() -> list[_Check]:
    I = "identity"
    checks = [
        _Check("sympl_fourier_involution", "symplectic Fourier transform is self-inverse",
               I, 1e-8, 20, _fourier_involution),
        _Check("sympl_fourier_parseval", "symplectic Fourier transform preserves the L2 norm",
               I, 1e-8, 20, _fourier_parseval),
        _Check("sympl_fourier_gaussian", "exp(-|X|^2) is fixed by the symplectic Fourier transform",
               I, 1e-8, 1, _fourier_gaussian),
        _Check("weyl_product_routes", "Weyl product via twisted convolution equals the symbol of the composed operators",
               I, 1e-8, 20, _weyl_routes),
        _Check("twisted_convolution_fourier", "Fourier transform of a twisted convolution moves onto either factor",
               I, 1e-8, 20, _twist_fourier),
        _Check("weyl_product_fourier", "Fourier transform of a Weyl product is a twisted convolution of transforms",
               I, 1e-8, 20, _weyl_fourier),
        _Check("sympl_stft_fourier_swap", "symplectic STFT of transformed symbol and even window swaps X and Y",
               I, 1e-8, 5, _sympl_stft_swap(False)),
        _Check("sympl_stft_fourier_swap_general", "swap with a general window uses the reflected transformed window",
               I, 1e-8, 5, _sympl_stft_swap(True)),
        _Check("weyl_stft_product_oracle", "symplectic STFT of a Weyl product as an integral of factor STFTs",
               I, 1e-5, 5, _weyl_stft_product),
        _Check("twisted_stft_product_oracle", "symplectic STFT of a twisted convolution as an integral of factor STFTs",
               I, 1e-5, 5, _twisted_stft_product),
        _Check("A_twisted_convolution", "A maps twisted convolution to operator composition",
               I, 1e-6, 20, _A_composition),
        _Check("A_reflection", "A of the reflected symbol reflects both kernel variables",
               I, 1e-8, 20, _A_reflection),
        _Check("A_fourier_flip", "A of the Fourier transform negates the first kernel variable",
               I, 1e-8, 20, _A_fourier_flip),
        _Check("A_fourier_weyl", "A of the Fourier transform is the scaled Weyl kernel",
               I, 1e-6, 20, _A_fourier_weyl),
        _Check("A_adjoint", "A of the tilde symbol is the adjoint kernel",
               I, 1e-8, 20, _A_adjoint),
        _Check("A_unitary", "A preserves the L2 norm",
               I, 1e-8, 20, _A_unitary),
        _Check("twisted_associativity", "twisted convolution is associative",
               I, 1e-8, 20, _twist_associative),
        _Check("twisted_adjoint_pairing", "twisted convolution pairing moves factors across the inner product",
               I, 1e-8, 20, _twist_pairing),
        _Check("weyl_composition_t_half", "quantization of the Weyl product is the operator product",
               I, 1e-6, 20, _composition(0.5)),
        _Check("weyl_composition_t_zero", "Kohn-Nirenberg quantization of the t-product is the operator product",
               I, 1e-6, 20, _composition(0.0)),
        _Check("rank_one_quantization", "quantized t-Wigner distribution is a rank-one operator",
               I, 1e-6, 20, _rank_one_quantization),
        _Check("wigner_calculus_change", "calculus transform maps Weyl-Wigner to t-Wigner distributions",
               I, 1e-6, 20, _wigner_calculus),
        _Check("calculus_roundtrip", "calculus transforms between two t-values invert each other",
               I, 1e-10, 20, _calculus_roundtrip),
        _Check("calculus_operator", "calculus transform preserves the operator",
               I, 1e-6, 20, _calculus_operator),
        _Check("wigner_stft_norms", "Wigner distribution norm equals a dilated STFT norm with exponent factor",
               I, 1e-6, 20, _wigner_stft),
        _Check("wigner_twisted_convolution", "twisted convolution of Wigner distributions",
               I, 1e-6, 20, _wigner_twist),
        _Check("window_change_identity", "window change for Wigner distributions through twisted convolution",
               I, 1e-6, 20, _window_change),
    ]
    for (j, k), st in dilation_pairs().items():
        skip = None if st is not None else "no real dilation pair for this sign pattern"
        checks.append(_Check(f"dilated_convolution_j{j}k{k}",
                             "A of a dilated convolution as an integral of translated kernels",
                             I, 1e-5, 10, None if st is None else _dilated(j, k), skip))
    checks += [
        _Check("toeplitz_routes_t_half", "Toeplitz operator as Weyl quantization of a convolved symbol",
               I, 1e-5, 20, _toeplitz_routes(0.5)),
        _Check("toeplitz_routes_t_zero", "Toeplitz operator as t = 0 quantization of a convolved symbol",
               I, 1e-5, 20, _toeplitz_routes(0.0)),
        _Check("toeplitz_unit_symbol", "Toeplitz operator of the unit symbol with a unit window is the identity",
               I, 1e-5, 1, _toeplitz_unit),
        _Check("partial_stft_norm", "STFT in the first variable gives the full weighted M2 norm",
               I, 1e-6, 5, _partial_stft),
        _Check("hilbert_schmidt_law", "Hilbert-Schmidt norm of the Weyl operator is the scaled L2 norm",
               I, 1e-8, 50, _hilbert_schmidt),
        _Check("rank_one_schatten", "every Schatten norm of a unit rank-one Wigner symbol is (2 pi)^(-1/2)",
               I, 1e-6, 20, _rank_one_schatten),
        _Check("twisted_convolution_routes", "direct twisted convolution equals the kernel-composition route",
               I, 1e-9, 20, _twist_routes),
        _Check("weight_infconv_oracle", "min-plus infimal convolution equals the exhaustive minimum",
               I, 1e-12, 5, _infconv_oracle),
        _Check("mixed_norm_gaussian", "L2 mixed norm of exp(-|X|^2) is (pi/2)^(1/2)",
               I, 1e-8, 1, _mixed_gaussian),
        _Check("polar_reconstruction", "symbol rebuilt from its singular system",
               I, 1e-6, 20, _polar_reconstruct),
        _Check("polar_norm_formula", "Schatten norm is the scaled l^p norm of the singular values",
               I, 1e-8, 20, _polar_norm),
        _Check("symbol_equivalences", "eight equivalent Schatten norms of a symbol agree",
               I, 1e-7, 5, _equivalences),
    ]
    return checks


def run_identity_suite(config: SuiteConfig) -> list[CheckResult]:
    """Every identity check (or the configured selection) at its tolerance."""
    return _run_suite(identity_checks(), config)


# ---------------------------------------------------------------- inequality checks

def _holder(ctx, rng):
    H1, H2, H3 = _spaces(ctx, ["sig(X,1)", "sig(x,0.5)", "sig(X,-1)"])
    a1 = _rank_one(ctx, rng) + _rank_one(ctx, rng) * complex(*rng.standard_normal(2))
    a2 = _rank_one(ctx, rng) + _rank_one(ctx, rng) * complex(*rng.standard_normal(2))
    while True:
        p1, p2 = (ExtExponent.of(_EXPS[i]) for i in rng.integers(0, 4, 2))
        rr = p1.recip + p2.recip
        if rr <= 1:
            break
    r = ExtExponent.of("inf") if rr == 0 else ExtExponent.of(1 / rr)
    lhs = schatten_norm(weyl_product(a2, a1), 0.5, r, H1, H3)
    rhs = schatten_norm(a1, 0.5, p1, H1, H2) * schatten_norm(a2, 0.5, p2, H2, H3)
    return max(0.0, lhs - rhs) / rhs


def _duality(ctx, rng):
    H1, H2 = _spaces(ctx, ["sig(X,1)", "sig(x,-1)"])
    a = _rank_one(ctx, rng) + _rank_one(ctx, rng) * 0.5
    b = _rank_one(ctx, rng) + _rank_one(ctx, rng) * complex(*rng.standard_normal(2))
    p = _EXPS[int(rng.integers(0, 4))]
    lhs, rhs = schatten_duality_pair(a, b, 0.5, p, H1, H2)
    return max(0.0, lhs / rhs - 1)


def _p_monotone(ctx, rng):
    a = _rank_one(ctx, rng) + _rank_one(ctx, rng) * 0.5 + _rank_one(ctx, rng) * 0.3
    norms = [schatten_norm(a, 0.5, p) for p in (1, 2, 4, "inf")]
    return max(max(0.0, n2 - n1) / n1 for n1, n2 in zip(norms, norms[1:]))


def _space_monotone(ctx, rng):
    H1, big, small = _spaces(ctx, ["sig(X,1)", "sig(X,1)", "const(1)"])
    a = _rank_one(ctx, rng) + _rank_one(ctx, rng) * 0.5
    p = _EXPS[int(rng.integers(0, 4))]
    n_big = schatten_norm(a, 0.5, p, H1, big)
    return max(0.0, schatten_norm(a, 0.5, p, H1, small) - n_big) / n_big


def _domination(ctx, rng):
    a, b = _pair(ctx, rng)
    a = a * complex(*rng.standard_normal(2))
    slack, scale = pointwise_domination(a, b)
    return max(0.0, slack) / scale


def _min_eig_ratio(M: np.ndarray) -> float:
    ev = np.linalg.eigvalsh((M + M.conj().T) / 2)
    return max(0.0, -ev[0] / np.max(np.abs(ev)))


def _product_positivity(ctx, rng):
    r = 2 ** -0.5
    a1, a2 = _sigma_pos(rng, ctx.grid), _sigma_pos(rng, ctx.grid)
    prod = symmetry_transform(a1, "dilate", r) * symmetry_transform(a2, "dilate", r)
    return _min_eig_ratio(A_op(prod).entries)


def _convolution_positivity(ctx, rng):
    r = 2 ** 0.5
    b1, b2 = _weyl_pos(rng, ctx.grid), _weyl_pos(rng, ctx.grid)
    cv = convolve(symmetry_transform(b1, "dilate", r), symmetry_transform(b2, "dilate", r))
    return _min_eig_ratio(op_t(cv).entries)


def _monomial_positivity(ctx, rng):
    a = _sigma_pos(rng, ctx.grid)
    return _min_eig_ratio(A_op(odd_monomial([a], [3], refine=1)).entries)


def _rank_one_square_positivity(ctx, rng):
    u = _rank_one(ctx, rng)
    v = symmetry_transform(u, "dilate", 2 ** -0.5)
    a = v.with_values(np.abs(v.values) ** 2)
    return _min_eig_ratio(op_t(a).entries)


def _toeplitz_positivity(ctx, rng):
    g = ctx.grid
    b = _weyl_pos(rng, g)
    a = symmetry_transform(b, "dilate", 2 ** -0.5)
    h = _gauss_mod(rng, g)
    return _min_eig_ratio(toeplitz(a, h, h).entries)


# ratio checks: fn(ctx, trials) -> (ratio at N, ratio at N/2, bound or None, detail)

def _half(ctx: _Ctx) -> GridSpec:
    return _grid(ctx.cfg.N // 2, ctx.cfg.L)


def _over_grids(ctx, trials, one_trial):
    """Maximum ratio over trials on the configured grid and on the half grid."""
    out = []
    for grid in (ctx.grid, _half(ctx)):
        seeds = _trial_seeds(ctx.cfg.seed, trials)
        vals = _run_trials(lambda c, rng: one_trial(c, rng, grid), ctx, seeds)
        out.append(float(max(vals)))
    return out


def _lp_weighted(a: PhaseFn, p: ExtExponent, w) -> float:
    v = np.abs(a.values) * w
    if p.is_inf:
        return float(v.max())
    pf = float(p.value)
    return float((np.sum(v ** pf) * a.cell) ** (1 / pf))


def _twisted_young(p1, p2, p, bound):
    e1, e2, e = (ExtExponent.of(v) for v in (p1, p2, p))

    def fn(ctx, trials):
        if not check_exponents_twisted_young(e1, e2, e):
            return None
        exprs = ctx.weights([])
        weighted = len(exprs) == 3
        detail = {"exponents": [str(e1), str(e2), str(e)]}
        if weighted:
            ok, c_est = check_weight_condition("submultiplicative", exprs)
            detail["weight_condition"] = {"ok": ok, "C_est": c_est}
            if not ok:
                return None

        def one(c, rng, grid):
            a, b = _pair(c, rng, grid)
            ws = [1.0, 1.0, 1.0]
            if weighted:
                ws = [weight_eval(x, grid).values for x in exprs]
            num = _lp_weighted(twisted_convolve(a, b), e, ws[0])
            return num / (_lp_weighted(a, e1, ws[1]) * _lp_weighted(b, e2, ws[2]))
        fine, coarse = _over_grids(ctx, trials, one)
        return fine, coarse, None if weighted else bound, detail
    return fn


def weight4_from_expr(expr: str) -> Optional[Callable]:
    """Weight on the doubled phase space depending on the first point only."""
    factors = parse_weight(expr)
    if all(v == "const" for v, _ in factors):
        return None
    w = _weight_callable(factors)
    return lambda x1, x2, y1, y2: w(x1 + 0 * y1, x2 + 0 * y2)


def _algebra_ratio(twisted: bool):
    """Modulation-norm ratio for the Weyl product (``M`` flavour) or twisted
    convolution (``W`` flavour) at ``p_j = q_j = 2``, gated by the exact exponent
    checker and the weight condition for the configured weights."""
    exps = ("2", "2", "2", "2", "2", "2")

    def fn(ctx, trials):
        checker = check_exponents_twist if twisted else check_exponents_weyl
        if not checker(*exps):
            return None
        exprs = ctx.weights(["const(1)"] * 3)
        kind = "twisted" if twisted else "weyl"
        ok, c_est = check_weight_condition(kind, exprs)
        if not ok:
            return None
        p0, p1, p2, q0, q1, q2 = exps
        flavor = "W" if twisted else "M"
        w0, w1, w2 = (weight4_from_expr(e) for e in exprs)

        def one(c, rng, grid):
            a, b = _pair(c, rng, grid)
            prod = twisted_convolve(a, b) if twisted else weyl_product(a, b)
            num = sympl_mod_norm(prod, p0, q0, flavor, weight4=w0)
            return num / (sympl_mod_norm(a, p1, q1, flavor, weight4=w1)
                          * sympl_mod_norm(b, p2, q2, flavor, weight4=w2))
        fine, coarse = _over_grids(ctx, trials, one)
        return fine, coarse, None, {"exponents": list(exps), "weights": exprs,
                                    "weight_condition": {"ok": ok, "C_est": c_est}}
    return fn


_YOUNG_TRIPLES = (("1", "1", "1"), ("1", "2", "2"), ("2", "2", "inf"))


def _dilated_ratio(kind: str, flavor: str, t_calc: float = 0.5):
    """Schatten-norm ratio for dilated convolutions (``kind='conv'``, dilations
    sqrt 2) or products (``kind='prod'``, dilations 1/sqrt 2)."""
    r = 2 ** 0.5 if kind == "conv" else 2 ** -0.5

    def fn(ctx, trials):
        triples = [t for t in _YOUNG_TRIPLES if check_exponents_young(t[:2], t[2])]
        if not triples:
            return None

        def norm(a, p):
            if flavor == "A":
                return schatten_norm(a, 0.5, p, flavor="A")
            return schatten_norm(a, t_calc, p)

        def one(c, rng, grid):
            best = 0.0
            a1 = _rank_one(c, rng, grid) + _rank_one(c, rng, grid) * 0.5
            a2 = _rank_one(c, rng, grid) + _rank_one(c, rng, grid) * 0.5
            if flavor != "A" and t_calc != 0.5:
                a1, a2 = calculus_transform(a1, 0.5, t_calc), calculus_transform(a2, 0.5, t_calc)
            d1, d2 = symmetry_transform(a1, "dilate", r), symmetry_transform(a2, "dilate", r)
            res = convolve(d1, d2) if kind == "conv" else d1 * d2
            for p1, p2, pr in triples:
                best = max(best, norm(res, pr) / (norm(a1, p1) * norm(a2, p2)))
            return best
        fine, coarse = _over_grids(ctx, trials, one)
        return fine, coarse, None, {"triples": [list(t) for t in triples], "dilation": r}
    return fn


def _three_factor_ratio(ctx, trials):
    """Convolution of three symbols dilated by sqrt 3 (so that the squared
    reciprocal dilations sum to one) on A-Schatten classes."""
    dil = (3 ** 0.5,) * 3
    if abs(_dilation_relation(dil, (0, 0, 0)) - 1) > 1e-12:
        return None
    triples = [t for t in (("1", "1", "1", "1"), ("1", "1", "2", "2"), ("1", "2", "2", "inf"))
               if check_exponents_young(t[:3], t[3])]

    def one(c, rng, grid):
        syms = [_rank_one(c, rng, grid) + _rank_one(c, rng, grid) * 0.5 for _ in range(3)]
        d = [symmetry_transform(a, "dilate", dil[0]) for a in syms]
        res = convolve(convolve(d[0], d[1]), d[2])
        best = 0.0
        for p1, p2, p3, r in triples:
            den = 1.0
            for a, p in zip(syms, (p1, p2, p3)):
                den *= schatten_norm(a, 0.5, p, flavor="A")
            best = max(best, schatten_norm(res, 0.5, r, flavor="A") / den)
        return best
    fine, coarse = _over_grids(ctx, trials, one)
    return fine, coarse, None, {"triples": [list(t) for t in triples], "dilation": dil[0]}


def _monomial_ratio(ctx, trials):
    def one(c, rng, grid):
        a = _rank_one(c, rng, grid) + _rank_one(c, rng, grid) * 0.5
        cube = odd_monomial([a], [3], refine=1)
        return schatten_norm(cube, 0.5, 1, flavor="A") / schatten_norm(a, 0.5, 1, flavor="A") ** 3
    fine, coarse = _over_grids(ctx, trials, one)
    return fine, coarse, None, {"degree": 3}


def inequality_checks() -> list[_Check]:
    B, P, D, R = "bound", "positivity", "domination", "ratio"
    young_c = float(np.sqrt(2 / np.pi))
    checks = [
        _Check("schatten_holder", "Schatten norm of a Weyl product is at most the product of norms",
               B, 1e-8, 100, _holder),
        _Check("schatten_duality", "L2 pairing of symbols is bounded by dual Schatten norms",
               B, 1e-8, 20, _duality),
        _Check("schatten_p_monotone", "Schatten norms decrease as p increases",
               B, 1e-8, 20, _p_monotone),
        _Check("schatten_space_monotone", "a smaller target weight never increases the Schatten norm",
               B, 1e-8, 20, _space_monotone),
        _Check("twisted_domination", "|a twisted b| is dominated by (2/pi)^(1/2) |a| * |b|",
               D, 1e-12, 20, _domination),
        _Check("product_positivity", "product of 1/sqrt2-dilated sigma-positive symbols is sigma-positive",
               P, 1e-8, 20, _product_positivity),
        _Check("convolution_positivity", "convolution of sqrt2-dilated Weyl-positive symbols is Weyl-positive",
               P, 1e-8, 20, _convolution_positivity),
        _Check("odd_monomial_positivity", "cube of a sigma-positive symbol is sigma-positive",
               P, 1e-8, 20, _monomial_positivity),
        _Check("rank_one_square_positivity", "|u(X/sqrt2)|^2 of a rank-one symbol u is Weyl-positive",
               P, 1e-8, 20, _rank_one_square_positivity),
        _Check("toeplitz_positivity", "Toeplitz operator with equal windows is positive when a(sqrt2 .) is",
               P, 1e-8, 20, _toeplitz_positivity),
        _Check("twisted_young_2_2_2", "twisted convolution L2 x L2 -> L2 with constant 1",
               R, 2.0, 20, _twisted_young("2", "2", "2", 1.0)),
        _Check("twisted_young_1_1_1", "twisted convolution L1 x L1 -> L1 with constant (2/pi)^(1/2)",
               R, 2.0, 20, _twisted_young("1", "1", "1", young_c)),
        _Check("twisted_young_1_2_2", "twisted convolution L1 x L2 -> L2 with constant (2/pi)^(1/2)",
               R, 2.0, 20, _twisted_young("1", "2", "2", young_c)),
        _Check("twisted_young_2_2_inf", "twisted convolution L2 x L2 -> Linf with constant (2/pi)^(1/2)",
               R, 2.0, 20, _twisted_young("2", "2", "inf", young_c)),
        _Check("twisted_young_2_2_4", "twisted convolution L2 x L2 -> L4, constant recorded",
               R, 2.0, 20, _twisted_young("2", "2", "4", None)),
        _Check("twisted_young_4/3_2_2", "twisted convolution L4/3 x L2 -> L2, constant recorded",
               R, 2.0, 20, _twisted_young("4/3", "2", "2", None)),
        _Check("twisted_young_lp_range", "twisted convolution Lp x Lq -> Lp for q <= min(p, p'), constant recorded",
               R, 2.0, 20, _twisted_young("4", "4/3", "4", None)),
        _Check("weyl_modulation_ratio", "Weyl product on symbol modulation spaces, constant recorded",
               R, 2.0, 2, _algebra_ratio(False)),
        _Check("twisted_modulation_ratio", "twisted convolution on symbol modulation spaces, constant recorded",
               R, 2.0, 2, _algebra_ratio(True)),
        _Check("dilated_convolution_ratio_A", "dilated convolution on A-Schatten classes, constant recorded",
               R, 2.0, 5, _dilated_ratio("conv", "A")),
        _Check("dilated_product_ratio_A", "dilated product on A-Schatten classes, constant recorded",
               R, 2.0, 5, _dilated_ratio("prod", "A")),
        _Check("dilated_convolution_ratio_weyl", "dilated convolution on Weyl-Schatten classes, constant recorded",
               R, 2.0, 5, _dilated_ratio("conv", "weyl")),
        _Check("dilated_product_ratio_weyl", "dilated product on Weyl-Schatten classes, constant recorded",
               R, 2.0, 5, _dilated_ratio("prod", "weyl")),
        _Check("dilated_convolution_ratio_t_zero", "dilated convolution on t = 0 Schatten classes, constant recorded",
               R, 2.0, 5, _dilated_ratio("conv", "t", 0.0)),
        _Check("dilated_product_ratio_t_zero", "dilated product on t = 0 Schatten classes, constant recorded",
               R, 2.0, 5, _dilated_ratio("prod", "t", 0.0)),
        _Check("three_factor_convolution_ratio", "convolution of three dilated symbols on A-Schatten classes, constant recorded",
               R, 2.0, 3, _three_factor_ratio),
        _Check("odd_monomial_ratio", "trace-class norm of a cube against the cubed norm, constant recorded",
               R, 2.0, 5, _monomial_ratio),
    ]
    return checks


def run_inequality_suite(config: SuiteConfig) -> list[CheckResult]:
    """Bounds, positivity, domination and recorded ratios (or the configured selection)."""
    return _run_suite(inequality_checks(), config)


# ---------------------------------------------------------------- reporting

def report_bytes(results: Sequence[CheckResult], with_time: bool = False) -> bytes:
    """Canonical JSON encoding: sorted keys, fixed separators, trailing newline."""
    payload = [r.to_dict(with_time) for r in results]
    return (json.dumps(payload, sort_keys=True, indent=2, allow_nan=True) + "\n").encode("utf-8")


def emit_report(results: Sequence[CheckResult], path=None, with_time: bool = False) -> int:
    """Write the report (stdout when ``path`` is None); exit code 1 iff any check failed."""
    data = report_bytes(results, with_time)
    if path is None:
        import sys
        sys.stdout.write(data.decode("utf-8"))
    else:
        with open(path, "wb") as fh:
            fh.write(data)
    return 1 if any(r.status == "fail" for r in results) else 0
