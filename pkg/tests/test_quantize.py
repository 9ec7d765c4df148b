import numpy as np
import pytest

from wcalc.phasespace import ConfigFn, PhaseFn, gaussian, sympl_fourier, symmetry_transform
from wcalc.products import smooth_one, twisted_convolve, weyl_product
from wcalc.quantize import (
    A_inv, A_op, OperatorMatrix, op_t, rank_one, read_operator, symbol_from_op, toeplitz,
    write_operator,
)
from wcalc.transforms import calculus_transform, wigner_t

from conftest import rel


def gauss2(grid, scale=1.0):
    a = PhaseFn(grid, np.zeros((grid.N, grid.N)))
    x, e = a.coords
    return a.with_values(np.exp(-scale * (x ** 2 + e ** 2)))


# ---------------------------------------------------------------- op_t

@pytest.mark.parametrize("t", [0.0, 0.5, 1.0])
def test_quantized_wigner_is_rank_one(members, t):
    f1, f2 = members["f"][:2]
    T = op_t(wigner_t(f1, f2, t) * np.sqrt(2 * np.pi), t)
    assert rel(T, rank_one(f1, f2)) < 1e-6
    g = members["f"][2]
    want = np.sum(g.values * np.conj(f2.values)) * g.grid.dx * f1.values
    assert rel(T.apply(g).values, want) < 1e-6


def probes(g):
    for c in (-1.0, 0.0, 1.0):
        for w in (-1.0, 0.0, 1.0):
            yield ConfigFn(g, np.exp(-(g.x - c) ** 2 / 2 + 1j * w * g.x))


def test_smooth_one_quantizes_to_identity():
    # the symbol lattice spans half the sampling band, so the unit symbol acts as
    # the identity on functions living well inside the box, not entrywise
    from wcalc.phasespace import l2_norm, make_grid
    g = make_grid(1, 256, 20.0)
    T = op_t(smooth_one(g))
    for f in probes(g):
        assert l2_norm(T.apply(f) - f) < 1e-5 * l2_norm(f)


# a unit shear moves these members out of the box, so the steps stay at 1/2
@pytest.mark.parametrize("s, t", [(0.5, 0.0), (0.0, 0.5), (1.0, 0.5), (0.5, 1.0)])
def test_operator_independent_of_calculus(members, s, t):
    a = members["a"][0]
    assert rel(op_t(calculus_transform(a, s, t), t), op_t(a, s)) < 1e-6


def test_generic_t_consistency(members):
    a = members["a"][1]
    assert rel(op_t(calculus_transform(a, 0.5, 0.3), 0.3), op_t(a, 0.5)) < 1e-5


def test_weyl_composition(members):
    a, b = members["a"][:2]
    assert rel(op_t(weyl_product(a, b)), op_t(a) @ op_t(b)) < 1e-6


def test_symbol_from_op_roundtrip(members, grid):
    a = members["a"][2]
    assert rel(symbol_from_op(op_t(a), 0.5), a) < 1e-12
    # off-center t resamples the kernel along sheared lines, which is accurate
    # once the kernel decays inside the box in both variables
    b = gauss2(grid)
    x, e = b.coords
    b = b.with_values(np.exp(-x ** 2 - e ** 2 / 4))
    for t in (0.0, 1.0):
        assert rel(symbol_from_op(op_t(b, t), t), b) < 1e-7


def test_op_rejects_tf_lattice(grid):
    with pytest.raises(ValueError):
        op_t(PhaseFn(grid, np.ones((grid.N, grid.N)), grid.tf_spacing))


# ---------------------------------------------------------------- A and its inverse

def test_A_sympl_fourier_is_weyl(members):
    a = members["a"][0]
    assert rel(A_op(sympl_fourier(a)), np.sqrt(2 * np.pi) * op_t(a).entries) < 1e-6


def test_A_adjoint_and_reflection(members):
    a = members["a"][1]
    assert rel(A_op(symmetry_transform(a, "tilde")), A_op(a).adjoint()) < 1e-8
    U = A_op(a).entries
    assert rel(A_op(sympl_fourier(a)).entries, U[np.roll(np.arange(a.grid.N)[::-1], 1)]) < 1e-8


def test_A_twisted_convolution(members):
    a, b = members["a"][:2]
    assert rel(A_op(twisted_convolve(a, b)), A_op(a) @ A_op(b)) < 1e-6


def test_A_unitary_and_inverse(members):
    for a in members["a"]:
        assert abs(A_op(a).hs_norm() - a.norm()) < 1e-8 * a.norm()
        assert rel(A_inv(A_op(a)), a) < 1e-8


def test_A_inv_of_gaussian_projection(grid):
    g0 = gaussian(grid)
    U = rank_one(g0, g0)
    a = A_inv(U)
    assert abs(a.norm() - U.hs_norm()) < 1e-8
    assert rel(A_op(a), U) < 1e-8
    assert np.linalg.matrix_rank(A_op(a).weighted, tol=1e-8) == 1


def test_A_inv_linear(members):
    U, V = A_op(members["a"][0]), A_op(members["a"][1])
    lhs = A_inv(U * 2.0 + V * 1j).values
    rhs = 2.0 * A_inv(U).values + 1j * A_inv(V).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(rhs))


def test_A_positivity_matches_weyl_positivity(members):
    # min eigenvalues of A a and of the symmetrized Weyl operator of F_sigma a
    for a in members["sp"] + [members["sp"][0] * -1.0]:
        ev_A = np.linalg.eigvalsh(A_op(a).hermitian_part().weighted)
        ev_W = np.linalg.eigvalsh(op_t(sympl_fourier(a)).hermitian_part().weighted)
        tol_A, tol_W = 1e-8 * np.max(np.abs(ev_A)), 1e-8 * np.max(np.abs(ev_W))
        assert (ev_A[0] >= -tol_A) == (ev_W[0] >= -tol_W)


# ---------------------------------------------------------------- Toeplitz

def test_toeplitz_unit_symbol_is_identity():
    from wcalc.phasespace import make_grid
    g = make_grid(1, 256, 20.0)
    g0 = gaussian(g)
    T = toeplitz(smooth_one(g), g0, g0)
    for f in probes(g):
        assert np.linalg.norm(T.apply(f).values - f.values) < 1e-5 * np.linalg.norm(f.values)


@pytest.mark.parametrize("t", [0.5, 0.0])
def test_toeplitz_routes_agree(grid, t):
    a = gauss2(grid, 0.5)
    h1 = gaussian(grid)
    h2 = ConfigFn(grid, np.exp(-(grid.x - 0.5) ** 2 / 2))
    D = toeplitz(a, h1, h2, "direct", t)
    W = toeplitz(a, h1, h2, "weyl", t)
    assert np.linalg.norm(D.entries - W.entries) <= 1e-5 * np.linalg.norm(D.entries)


def test_toeplitz_positive(grid, members):
    h = members["f"][0]
    a = gauss2(grid, 0.3).with_values(np.abs(members["a"][0].values))
    T = toeplitz(a, h, h).hermitian_part().weighted
    ev = np.linalg.eigvalsh(T)
    assert ev[0] >= -1e-8 * ev[-1]


def test_toeplitz_errors(grid):
    g0 = gaussian(grid)
    with pytest.raises(ValueError):
        toeplitz(gauss2(grid), g0 * 0, g0)
    with pytest.raises(ValueError):
        toeplitz(gauss2(grid), g0, g0, "other")


# ---------------------------------------------------------------- matrices and files

def test_operator_matrix_guards(grid):
    with pytest.raises(ValueError):
        OperatorMatrix(grid, np.zeros((3, 3)))
    M = np.eye(grid.N)
    M[0, 0] = np.nan
    with pytest.raises(ValueError):
        OperatorMatrix(grid, M)


def test_operator_file_roundtrip(tmp_path, members):
    T = op_t(members["a"][0])
    path = tmp_path / "op.bin"
    write_operator(path, T)
    back = read_operator(path)
    assert back.grid == T.grid
    assert back.entries.tobytes() == T.entries.tobytes()
    path.write_bytes(path.read_bytes()[:-16])
    with pytest.raises(ValueError):
        read_operator(path)
