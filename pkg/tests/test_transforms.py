import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wcalc.harness import random_ensemble
from wcalc.phasespace import (
    ConfigFn, ExtExponent, PhaseFn, fourier, gaussian, l2_norm, make_grid, sympl_fourier,
    weight_eval,
)
from wcalc.transforms import (
    MixedNormSpec, calculus_transform, m2_partial_norm, mixed_norm, mod_norm, stft,
    stft_matrix, sympl_mod_norm, sympl_stft, wigner_stft_norms, wigner_t,
)

from conftest import rel


def spec(p, q, order=1, flavor="M"):
    return MixedNormSpec(ExtExponent.of(p), ExtExponent.of(q), order, None, flavor)


# ---------------------------------------------------------------- STFT

def test_stft_moyal(members, grid):
    phi = gaussian(grid)
    for f in members["f"]:
        V = stft(f, phi)
        assert abs(V.norm() - l2_norm(f) * l2_norm(phi)) <= 1e-8 * l2_norm(f)


def test_stft_zero_and_peak(grid):
    g0 = gaussian(grid)
    assert np.all(stft(g0 * 0, g0).values == 0)
    V = stft(g0, g0)
    i, j = np.unravel_index(np.argmax(np.abs(V.values)), V.values.shape)
    assert (grid.x[i], grid.xi[j]) == (0.0, 0.0)
    assert abs(V.values[i, j] - (2 * np.pi) ** -0.5) < 1e-10


def test_stft_rejects_zero_window(grid, members):
    with pytest.raises(ValueError):
        stft(members["f"][0], gaussian(grid) * 0)


def test_stft_matrix_matches_stft(members, grid):
    f, phi = members["f"][0], members["f"][1]
    S = stft_matrix(phi)
    assert rel((S @ f.values).reshape(grid.N, grid.N), stft(f, phi)) < 1e-12


# ---------------------------------------------------------------- symplectic STFT

def test_sympl_stft_moyal_and_zero(coarse):
    a = random_ensemble(3, "rank_one", 1, coarse)[0]
    x, e = a.coords
    phi = a.with_values(np.exp(-(x - 0.2) ** 2 - e ** 2))
    V = sympl_stft(a, phi)
    assert abs(V.norm() - a.norm() * phi.norm()) <= 1e-6 * a.norm() * phi.norm()
    assert np.all(sympl_stft(a * 0, phi).values == 0)


def test_sympl_stft_fourier_swap_even_window(coarse):
    a = random_ensemble(4, "rank_one", 1, coarse)[0]
    x, e = a.coords
    phi = a.with_values(np.exp(-x ** 2 / 1.3 - e ** 2 / 0.7))
    lhs = sympl_stft(sympl_fourier(a), sympl_fourier(phi)).values
    V = sympl_stft(a, phi).values.transpose(2, 3, 0, 1)
    X1, X2 = x[:, :, None, None], e[:, :, None, None]
    Y1, Y2 = x[None, None], e[None, None]
    assert rel(lhs, np.exp(2j * (X1 * Y2 - Y1 * X2)) * V) < 1e-8


def test_sympl_stft_guards(grid, coarse):
    a = random_ensemble(4, "rank_one", 1, grid)[0]
    with pytest.raises(MemoryError):
        sympl_stft(a, a)
    b = random_ensemble(4, "rank_one", 1, coarse)[0]
    with pytest.raises(ValueError):
        sympl_stft(b, b * 0)


# ---------------------------------------------------------------- Wigner and calculus

def test_wigner_gaussian_closed_form(grid):
    g0 = gaussian(grid)
    W = wigner_t(g0, g0)
    x, e = W.coords
    assert np.max(np.abs(W.values - np.sqrt(2 / np.pi) * np.exp(-x ** 2 - e ** 2))) < 1e-6


def test_wigner_conjugate_symmetry_and_norm(members):
    f1, f2 = members["f"][:2]
    assert rel(np.conj(wigner_t(f1, f2).values), wigner_t(f2, f1)) < 1e-12
    for t in (0.0, 0.5, 1.0, 0.3):
        assert abs(wigner_t(f1, f2, t).norm() - l2_norm(f1) * l2_norm(f2)) < 1e-6


def test_calculus_transform_examples(members):
    a = members["a"][0]
    assert np.array_equal(calculus_transform(a, 0.3, 0.3).values, a.values)
    assert rel(calculus_transform(calculus_transform(a, 0.5, 0.1), 0.1, 0.5), a) < 1e-10
    f1, f2 = members["f"][:2]
    for s, t in [(0.5, 0.0), (0.0, 1.0), (1.0, 0.5)]:
        assert rel(calculus_transform(wigner_t(f1, f2, s), s, t), wigner_t(f1, f2, t)) < 1e-6


# ---------------------------------------------------------------- mixed and modulation norms

def test_mixed_norm_gaussian(grid):
    F = PhaseFn(grid, np.zeros((grid.N, grid.N)))
    x, e = F.coords
    F = F.with_values(np.exp(-x ** 2 - e ** 2))
    assert abs(mixed_norm(F, spec(2, 2)) - np.sqrt(np.pi / 2)) < 1e-8


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["1", "2", "3/2", "4", "inf"]), st.integers(0, 2 ** 32 - 1))
def test_mixed_norm_equal_exponents_order_free(p, seed):
    g = make_grid(1, 16, 3.0)
    rng = np.random.default_rng(seed)
    F = PhaseFn(g, rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16)))
    a, b = mixed_norm(F, spec(p, p, 1)), mixed_norm(F, spec(p, p, 2))
    assert a == pytest.approx(b, rel=1e-12)
    assert mixed_norm(F * 3.0, spec(p, "2")) == pytest.approx(3 * mixed_norm(F, spec(p, "2")), rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["1", "2", "4", "inf"]), st.sampled_from(["1", "3", "inf"]),
       st.integers(0, 2 ** 32 - 1))
def test_mixed_norm_monotone_and_separable(p, q, seed):
    g = make_grid(1, 16, 3.0)
    rng = np.random.default_rng(seed)
    u, w = rng.standard_normal(16), rng.standard_normal(16)
    F = PhaseFn(g, np.outer(u, w))
    h1, h2 = F.spacing
    P, Q = ExtExponent.of(p), ExtExponent.of(q)

    def lp(v, e, h):
        v = np.abs(v)
        return v.max() if e.is_inf else (np.sum(v ** float(e.value)) * h) ** (1 / float(e.value))
    want = lp(u, P, h1) * lp(w, Q, h2)
    assert mixed_norm(F, spec(p, q, 1)) == pytest.approx(want, rel=1e-12)
    shrink = F.with_values(F.values * rng.uniform(0, 1, (16, 16)))
    assert mixed_norm(shrink, spec(p, q, 2)) <= mixed_norm(F, spec(p, q, 2)) * (1 + 1e-12)


def test_mod_norm_l2_and_scaling(members, grid):
    f = members["f"][0]
    phi = gaussian(grid)
    assert abs(mod_norm(f, spec(2, 2), phi) - l2_norm(f)) < 1e-8
    assert mod_norm(f * 2, spec(1, 2), phi) == pytest.approx(2 * mod_norm(f, spec(1, 2), phi))
    with pytest.raises(ValueError):
        mod_norm(f, spec(2, 2), phi * 0)


def test_mod_norm_fourier_symmetry():
    # on a grid with dx == dxi the transform maps the lattice onto itself, and
    # |V_{F phi} F f(xi, -x)| = |V_phi f(x, xi)| swaps the roles of the two exponents
    g = make_grid(1, 64, np.sqrt(32 * np.pi))
    assert g.dx == pytest.approx(g.dxi)
    rng = np.random.default_rng(2)
    k = np.arange(-8, 9)
    c = rng.standard_normal(k.size) + 1j * rng.standard_normal(k.size)
    f = ConfigFn(g, np.exp(-g.x ** 2 / 2) * (np.exp(0.25j * np.outer(g.x, k)) @ c))
    phi = ConfigFn(g, np.exp(-(g.x - 0.5) ** 2))
    fh, phih = ConfigFn(g, fourier(f).values), ConfigFn(g, fourier(phi).values)
    for p, q in [("1", "2"), ("2", "inf"), ("4", "1")]:
        lhs = mod_norm(f, spec(q, p, flavor="W"), phi)
        rhs = mod_norm(fh, spec(p, q, flavor="M"), phih)
        assert lhs == pytest.approx(rhs, rel=1e-8)


def test_m2_partial_norm_examples(coarse):
    g = coarse
    chi = gaussian(g)
    rng = np.random.default_rng(1)
    u = ConfigFn(g, np.exp(-(g.x - 0.3) ** 2) * np.exp(0.4j * g.x))
    w = ConfigFn(g, np.exp(-g.x ** 2 / 3) * (1 + 0.2 * rng.standard_normal(g.N)))
    F = PhaseFn(g, np.outer(u.values, w.values), (g.dx, g.dx))
    assert m2_partial_norm(F * 0, None, chi) == 0
    want = mod_norm(u, spec(2, 2), chi) * l2_norm(w)
    assert m2_partial_norm(F, None, chi) == pytest.approx(want, rel=1e-10)


def test_wigner_stft_norm_relation(members, grid):
    phi = gaussian(grid)
    omega = weight_eval("sig(X,1)", grid)
    for p, q in [("1", "2"), ("inf", "inf"), ("2", "4")]:
        for order in (1, 2):
            lhs, rhs = wigner_stft_norms(members["f"][0], phi, spec(p, q, order), omega)
            assert lhs == pytest.approx(rhs, rel=1e-6)


def test_sympl_mod_norm_gaussian_l2(grid):
    a = PhaseFn(grid, np.zeros((grid.N, grid.N)))
    x, e = a.coords
    a = a.with_values(np.exp(-x ** 2 - e ** 2))
    # the unweighted M^{2,2} norm is ||a|| ||phi|| by the Moyal identity
    assert sympl_mod_norm(a, 2, 2) == pytest.approx(a.norm() ** 2, rel=1e-8)


def test_sympl_mod_norm_matches_materialized(coarse):
    a = random_ensemble(5, "rank_one", 1, coarse)[0]
    x, e = a.coords
    phi = a.with_values(np.exp(-x ** 2 - e ** 2))
    V = np.abs(sympl_stft(a, phi).values).reshape(coarse.N ** 2, coarse.N ** 2)
    c = a.cell
    w = lambda X1, X2, Y1, Y2: (1 + X1 ** 2 + X2 ** 2) ** 0.5 * (1 + Y1 ** 2 + Y2 ** 2) ** -0.5
    W = V * w(x.reshape(-1)[:, None], e.reshape(-1)[:, None], x.reshape(-1)[None], e.reshape(-1)[None])

    def lp(v, p, axis):
        return v.max(axis=axis) if p == "inf" else (np.sum(v ** p, axis=axis) * c) ** (1 / p)
    for p, q in [(2, 2), (1, "inf"), ("inf", 1)]:
        assert sympl_mod_norm(a, p, q, "M", weight4=w) == pytest.approx(lp(lp(W, p, 0), q, 0), rel=1e-10)
        assert sympl_mod_norm(a, p, q, "W", weight4=w) == pytest.approx(lp(lp(W, q, 1), p, 0), rel=1e-10)
