import json

import numpy as np
import pytest

from wcalc import cli
from wcalc.harness import (
    CheckResult, SuiteConfig, check_exponents_twisted_lp, check_exponents_twist,
    check_exponents_twisted_young, check_exponents_weyl, check_exponents_young,
    check_weight_condition, emit_report, identity_checks, inequality_checks, random_ensemble,
    report_bytes, run_identity_suite, run_inequality_suite, weight4_from_expr, weight_infconv,
    weight_infconv_bruteforce, WEIGHT_KIND_TOKENS,
)
from wcalc.phasespace import PhaseFn, gaussian, l2_norm, make_grid, weight_eval, write_gfn
from wcalc.quantize import read_operator
from wcalc.spectral import sigma_positive

CHEAP = ["sympl_fourier_involution", "weyl_product_routes", "A_twisted_convolution",
         "rank_one_quantization"]


# ---------------------------------------------------------------- exponent checkers

def test_weyl_exponents():
    # P = 1/2 + 1/2 - 1/2 = 1/2 = 1 - Q, and every 1/p_j, 1/q_j lies in [P, Q]
    assert check_exponents_weyl(2, 2, 2, 2, 2, 2)
    # P = 1 + 1 - 1 = 1 and Q = 0 satisfy P = 1 - Q, but P <= 1/q_j fails
    assert not check_exponents_weyl(1, 1, 1, "inf", "inf", "inf")
    # P = 1/2 + 1/2 - 0 = 1 and Q = 1/2 + 1/2 - 1 = 0, but P <= 1/p0 = 0 fails
    assert not check_exponents_weyl("inf", 2, 2, 1, 2, 2)
    # P = 1/2 + 1/2 - 1 = 0 and Q = 1/2 + 1/2 - 0 = 1: P = 1 - Q, all reciprocals in [0, 1]
    assert check_exponents_weyl(1, 2, 2, "inf", 2, 2)


def test_twist_exponents():
    assert check_exponents_twist(2, 2, 2, 2, 2, 2)
    # P = 1/2 + 1/2 - 1 = 0 and Q = 1/2, so P = 1 - Q fails
    assert not check_exponents_twist(1, 2, 2, 2, 2, 2)
    # P = 1/2 and Q = 1 + 1 - 1 = 1: P = 1 - Q fails
    assert not check_exponents_twist(2, 2, 2, 1, 1, 1)


def test_young_exponents():
    assert check_exponents_young([1, 1], 1)
    assert check_exponents_young([2, 2], "inf")
    assert not check_exponents_young([2, 2], 1)
    assert not check_exponents_young([2, 2], 2)
    assert check_exponents_young([1, 1, 1], 1)
    assert check_exponents_young(["3/2", "3/2", "3/2"], "inf")
    assert not check_exponents_young([], 1)


def test_twisted_young_and_lp_range():
    assert check_exponents_twisted_young(2, 2, 2)
    assert check_exponents_twisted_young(1, 1, 1)
    assert check_exponents_twisted_young(1, 2, 2)
    assert check_exponents_twisted_young(2, 2, "inf")
    assert not check_exponents_twisted_young(4, 4, 2)         # p1 > p
    assert not check_exponents_twisted_young(2, 4, 4)         # sum below max(1/p, 1/p')
    for p in (1, "4/3", 2, 4, "inf"):
        assert check_exponents_twisted_lp(p, 1)
    assert check_exponents_twisted_lp(4, "4/3")
    assert check_exponents_twisted_lp(2, 2)
    assert not check_exponents_twisted_lp(4, 2)
    assert not check_exponents_twisted_lp("4/3", 2)


# ---------------------------------------------------------------- weight conditions

def test_constant_weights():
    for kind in ("weyl", "twisted", "submultiplicative"):
        ok, c = check_weight_condition(kind, ["const(1)"] * 3)
        assert ok and c == 1
    ok, c = check_weight_condition("dilated", ["const(1)"] * 3, (np.sqrt(2), np.sqrt(2)), (0, 0))
    assert ok and c == 1


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
def test_peetre_weights(s):
    ok, c = check_weight_condition("submultiplicative", [f"sig(X,{s})"] * 3)
    assert ok and c <= 2 ** (s / 2) + 1e-9


@pytest.mark.parametrize("s", [0.5, 1.0])
def test_growing_weight_rejected(s):
    ok, _ = check_weight_condition("submultiplicative", [f"sig(X,{s})", "const(1)", "const(1)"])
    assert not ok


def test_weight_condition_errors_and_dilations():
    ok, c = check_weight_condition("dilated", ["const(1)"] * 3, (1.0, 1.0), (0, 0))
    assert not ok and c == float("inf")
    with pytest.raises(ValueError):
        check_weight_condition("dilated", ["const(1)"] * 3)
    with pytest.raises(ValueError):
        check_weight_condition("other", ["const(1)"] * 3)


def test_kind_tokens_match_descriptive_kinds():
    for token, kind in WEIGHT_KIND_TOKENS.items():
        dil = (np.sqrt(2), np.sqrt(2)) if kind == "dilated" else None
        sg = (0, 0) if kind == "dilated" else None
        w = ["sig(X,1)", "sig(X,1)", "sig(X,1)"]
        assert check_weight_condition(token, w, dil, sg) == check_weight_condition(kind, w, dil, sg)


def test_double_weights():
    pair = ("sig(X,1)", "sig(X,1)")
    ok, c = check_weight_condition("weyl", [pair, pair, pair])
    assert np.isfinite(c)
    ok, c = check_weight_condition("weyl", ["sig(X,1)", "const(1)", "const(1)"])
    assert not ok


# ---------------------------------------------------------------- infimal convolution

DIL, SIGNS = [np.sqrt(2.0), 2.0, 2.0], [0, 0, 0]


@pytest.fixture(scope="module")
def small():
    return make_grid(1, 16, 6.0)


def test_infconv_constant(small):
    ones = [weight_eval("const(1)", small)] * 3
    w = weight_infconv(ones, DIL, SIGNS)
    assert np.all(w.values == 1)


def test_infconv_matches_bruteforce(small):
    ws = [weight_eval(e, small) for e in ("sig(X,1)", "sig(X,-0.7)", "sig(X,2)")]
    fast = weight_infconv(ws, DIL, SIGNS).values
    brute = weight_infconv_bruteforce(ws, DIL, SIGNS)
    assert np.max(np.abs(fast - brute) / brute) <= 1e-12


def test_infconv_splitting_bound(small):
    ws = [weight_eval(e, small) for e in ("sig(X,1.5)", "sig(X,0.5)", "const(1)")]
    w = weight_infconv(ws, DIL, SIGNS)
    rho = (1 - 2.0 ** -2) ** -0.5
    t1, t2 = DIL[0] / rho, DIL[1] / rho
    rng = np.random.default_rng(3)
    xs = small.points(w.spacing[0])
    es = small.points(w.spacing[1])
    for _ in range(40):
        X1 = rng.uniform(-2, 2, 2)
        X2 = np.array([xs[rng.integers(4, 12)], es[rng.integers(4, 12)]])
        lhs = w.fn(np.array(X1[0] + X2[0]), np.array(X1[1] + X2[1]))
        rhs = ws[0].fn(t1 * X1[0], t1 * X1[1]) * ws[1].fn(t2 * X2[0], t2 * X2[1])
        assert lhs <= rhs * (1 + 1e-12)


def test_infconv_below_factors(small):
    ws = [weight_eval(e, small) for e in ("sig(X,1)", "sig(X,1)", "const(1)")]
    w = weight_infconv(ws, DIL, SIGNS)
    rho = (1 - 2.0 ** -2) ** -0.5
    x, e = np.meshgrid(small.points(w.spacing[0]), small.points(w.spacing[1]), indexing="ij")
    for t in (DIL[0] / rho, DIL[1] / rho):
        assert np.all(w.values <= ws[0].fn(t * x, t * e) * (1 + 1e-12))


def test_infconv_guards(small):
    ws = [weight_eval("const(1)", small)] * 3
    with pytest.raises(ValueError):
        weight_infconv(ws, [1.0, 1.0, 1.0], SIGNS)
    with pytest.raises(ValueError):
        weight_infconv(ws[:1], [1.0], [0])


# ---------------------------------------------------------------- ensembles

def test_ensembles_deterministic(coarse):
    for kind in ("gauss_mod", "rank_one", "sigma_pos", "weyl_pos"):
        a = random_ensemble(42, kind, 2, coarse)
        b = random_ensemble(42, kind, 2, coarse)
        assert all(x.values.tobytes() == y.values.tobytes() for x, y in zip(a, b))
    c = random_ensemble(43, "gauss_mod", 1, coarse)[0]
    assert c.values.tobytes() != random_ensemble(42, "gauss_mod", 1, coarse)[0].values.tobytes()


def test_ensemble_contracts(grid, members):
    for f in members["f"]:
        assert 0.1 <= l2_norm(f) <= 10
    for a in members["a"] + members["sp"]:
        assert 0.1 <= a.norm() <= 10
    for a in random_ensemble(5, "sigma_pos", 5, grid):
        assert sigma_positive(a)[0]
    with pytest.raises(ValueError):
        random_ensemble(1, "nope", 1, grid)


# ---------------------------------------------------------------- configuration

def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        SuiteConfig(seed=-1)
    with pytest.raises(ValueError):
        SuiteConfig(seed=2 ** 64)
    SuiteConfig(seed=2 ** 64 - 1)
    with pytest.raises(ValueError):
        SuiteConfig(count=0)
    with pytest.raises(ValueError):
        SuiteConfig(tolerances={"x": -1})
    with pytest.raises(ValueError):
        SuiteConfig(weights={"x": ["sig(y,1)"]})
    with pytest.raises(ValueError):
        SuiteConfig(N=30)
    with pytest.raises(ValueError):
        SuiteConfig.from_dict({"bogus": 1})
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"seed": 7, "count": 3, "tolerances": {"*": 0.5, "a": 0.1}}))
    cfg = SuiteConfig.from_json(path)
    assert cfg.seed == 7 and cfg.count == 3
    assert cfg.tolerance("a", 1.0) == 0.1 and cfg.tolerance("b", 1.0) == 0.5


def test_zero_tolerance_fails_checks_with_error():
    res = run_identity_suite(SuiteConfig(count=2, checks=CHEAP, tolerances={"*": 0}))
    assert [r.name for r in res] == CHEAP
    for r in res:
        assert r.tolerance == 0
        assert r.max_err > 0 and r.status == "fail"


def test_single_check_selection():
    res = run_inequality_suite(SuiteConfig(count=2, checks=["twisted_domination"]))
    assert [r.name for r in res] == ["twisted_domination"]
    assert res[0].trials == 2 and res[0].seed == 42


def test_status_matches_tolerance(identity_results, inequality_results):
    for r in identity_results.values():
        if r.status != "skip" and r.kind != "ratio":
            assert (r.status == "pass") == (r.max_err <= r.tolerance), r.name


def test_check_names_unique_and_described():
    checks = identity_checks() + inequality_checks()
    names = [c.name for c in checks]
    assert len(names) == len(set(names))
    assert all(c.ref for c in checks)


def test_default_suites_pass(identity_results, inequality_results):
    for r in list(identity_results.values()) + list(inequality_results.values()):
        assert r.status in ("pass", "skip"), (r.name, r.max_err, r.max_ratio, r.detail)
    skipped = [r.name for r in identity_results.values() if r.status == "skip"]
    assert skipped == ["dilated_convolution_j1k1"]


def test_thread_cap_does_not_change_bytes(monkeypatch):
    cfg = SuiteConfig(count=3, checks=["weyl_product_routes", "A_adjoint"])
    monkeypatch.setenv("WCALC_THREADS", "1")
    one = report_bytes(run_identity_suite(cfg))
    monkeypatch.setenv("WCALC_THREADS", "3")
    three = report_bytes(run_identity_suite(cfg))
    monkeypatch.delenv("WCALC_THREADS")
    auto = report_bytes(run_identity_suite(cfg))
    assert one == three == auto
    monkeypatch.setenv("WCALC_THREADS", "0")
    res = run_identity_suite(cfg)
    assert all(r.status == "fail" and "WCALC_THREADS" in r.detail["error"] for r in res)


# ---------------------------------------------------------------- reporting

def _result(status):
    return CheckResult("x", "ref", "identity", status, 1e-8, 1, 42, max_err=0.0, wall_time=1.5)


def test_emit_report(tmp_path, capsys):
    assert emit_report([]) == 0
    assert capsys.readouterr().out == "[]\n"
    path = tmp_path / "r.json"
    assert emit_report([_result("pass"), _result("skip")], path) == 0
    assert emit_report([_result("pass"), _result("fail")], path) == 1
    data = json.loads(path.read_text())
    assert [d["status"] for d in data] == ["pass", "fail"]
    assert "wall_time" not in data[0]
    assert report_bytes([_result("pass")]) == report_bytes([_result("pass")])
    assert json.loads(report_bytes([_result("pass")], with_time=True))[0]["wall_time"] == 1.5


# ---------------------------------------------------------------- command line

def test_cli_norm_spec():
    spec = cli.parse_norm_spec("W:2,inf:sig(X,1)")
    assert spec.flavor == "W" and spec.q.is_inf and spec.weight == "sig(X,1)"
    assert cli.parse_norm_spec("M:1,2").weight is None
    for bad in ("Q:2,2", "M:2", "M:2,2,2", "M:2,2:sig(y,1)"):
        with pytest.raises(ValueError):
            cli.parse_norm_spec(bad)


def test_cli_selftest(capsys):
    assert cli.main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert out.strip().endswith(f"{len(cli.SELFTEST_CHECKS)}/{len(cli.SELFTEST_CHECKS)} passed")


def test_cli_suites(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert cli.main(["identities", "--check", "A_adjoint", "--count", "2", "--out", str(out)]) == 0
    assert [d["name"] for d in json.loads(out.read_text())] == ["A_adjoint"]
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"tolerances": {"*": 0}, "count": 2}))
    assert cli.main(["inequalities", "--check", "twisted_domination", "--config", str(cfg)]) in (0, 1)
    assert json.loads(capsys.readouterr().out)[0]["tolerance"] == 0
    assert cli.main(["report", "--check", "A_adjoint", "--check", "twisted_domination",
                     "--count", "2", "--seed", "5", "--out", str(out)]) == 0
    assert {d["seed"] for d in json.loads(out.read_text())} == {5}
    with pytest.raises(SystemExit):
        cli.main(["identities", "--check", "no_such_check"])


def test_cli_file_commands(tmp_path, capsys, grid):
    g0 = gaussian(grid)
    fpath, apath = tmp_path / "f.gfn", tmp_path / "a.gfn"
    write_gfn(fpath, g0)
    a = PhaseFn(grid, np.zeros((grid.N, grid.N)))
    x, e = a.coords
    write_gfn(apath, a.with_values(np.exp(-x ** 2 - e ** 2)))

    assert cli.main(["norm", "--in", str(fpath), "--spec", "M:2,2"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1.0, abs=1e-8)

    opath = tmp_path / "op.bin"
    assert cli.main(["quantize", "--in", str(apath), "--t", "0.5", "--out", str(opath)]) == 0
    assert read_operator(opath).grid == grid

    from wcalc.transforms import wigner_t
    write_gfn(apath, wigner_t(g0, g0))
    assert cli.main(["schatten", "--in", str(apath), "--p", "1"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(0.3989422804, abs=1e-6)
    assert cli.main(["schatten", "--in", str(apath), "--p", "2", "--w1", "sig(X,1)"]) == 0
    assert float(capsys.readouterr().out) > 0

    assert cli.main(["toeplitz", "--in", str(apath), "--h1", str(fpath), "--route", "weyl",
                     "--out", str(opath)]) == 0
    assert read_operator(opath).grid == grid
    with pytest.raises(SystemExit):
        cli.main(["toeplitz", "--in", str(fpath), "--out", str(opath)])

    assert cli.main(["norm", "--in", str(tmp_path / "missing.gfn"), "--spec", "M:2,2"]) == 2
    assert cli.main(["norm", "--in", str(fpath), "--spec", "M:0.5,2"]) == 2


def test_cli_phase_norm(tmp_path, capsys, coarse):
    a = PhaseFn(coarse, np.zeros((coarse.N, coarse.N)))
    x, e = a.coords
    a = a.with_values(np.exp(-x ** 2 - e ** 2))
    path = tmp_path / "a.gfn"
    write_gfn(path, a)
    assert cli.main(["norm", "--in", str(path), "--spec", "M:2,2"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(a.norm() ** 2, rel=1e-8)
    assert weight4_from_expr("const(2)") is None
    w = weight4_from_expr("sig(X,2)")
    assert w(np.array(1.0), np.array(1.0), np.array(5.0), np.array(5.0)) == pytest.approx(3.0)
