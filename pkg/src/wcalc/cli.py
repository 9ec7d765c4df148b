"""Command-line entry point ``wcalc``."""
from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .harness import (
    SuiteConfig, emit_report, identity_checks, inequality_checks,
    run_identity_suite, run_inequality_suite, weight4_from_expr,
)
from .phasespace import ConfigFn, ExtExponent, PhaseFn, gaussian, parse_weight, read_gfn, weight_eval
from .quantize import op_t, toeplitz, write_operator
from .spectral import l2_space, make_space, schatten_norm
from .transforms import MixedNormSpec, mod_norm, sympl_mod_norm

# checks cheap enough for a smoke run
SELFTEST_CHECKS = [
    "sympl_fourier_involution", "sympl_fourier_parseval", "sympl_fourier_gaussian",
    "weyl_product_routes", "A_twisted_convolution", "weyl_composition_t_half",
    "rank_one_quantization", "hilbert_schmidt_law", "rank_one_schatten",
    "twisted_domination", "product_positivity",
]


def parse_norm_spec(text: str) -> MixedNormSpec:
    """``FLAVOR:p,q[:WEIGHT]`` with flavour ``M`` or ``W``, e.g. ``M:2,inf:sig(X,1)``."""
    parts = text.split(":", 2)
    if len(parts) < 2 or parts[0] not in ("M", "W"):
        raise ValueError(f"norm spec must look like 'M:p,q[:WEIGHT]', got {text!r}")
    exps = parts[1].split(",")
    if len(exps) != 2:
        raise ValueError("norm spec needs exactly two exponents p,q")
    weight = parts[2] if len(parts) == 3 and parts[2] else None
    if weight is not None:
        parse_weight(weight)
    return MixedNormSpec(ExtExponent.of(exps[0]), ExtExponent.of(exps[1]), 1, weight, parts[0])


def _config(args) -> SuiteConfig:
    cfg = SuiteConfig.from_json(args.config) if getattr(args, "config", None) else SuiteConfig()
    if getattr(args, "check", None):
        cfg.checks = list(args.check)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
        cfg.__post_init__()
    if getattr(args, "count", None) is not None:
        cfg.count = args.count
        cfg.__post_init__()
    return cfg


def _known(names, checks) -> None:
    valid = {c.name for c in checks}
    bad = [n for n in names or [] if n not in valid]
    if bad:
        raise SystemExit(f"unknown check(s): {', '.join(bad)}")


def _cmd_identities(args) -> int:
    cfg = _config(args)
    _known(cfg.checks, identity_checks())
    return emit_report(run_identity_suite(cfg), args.out, cfg.record_time)


def _cmd_inequalities(args) -> int:
    cfg = _config(args)
    _known(cfg.checks, inequality_checks())
    return emit_report(run_inequality_suite(cfg), args.out, cfg.record_time)


def _cmd_report(args) -> int:
    cfg = _config(args)
    _known(cfg.checks, identity_checks() + inequality_checks())
    results = run_identity_suite(cfg) + run_inequality_suite(cfg)
    return emit_report(results, args.out, cfg.record_time)


def _cmd_selftest(args) -> int:
    cfg = SuiteConfig(count=2, checks=SELFTEST_CHECKS)
    results = run_identity_suite(cfg) + run_inequality_suite(cfg)
    for r in results:
        value = r.max_err if r.max_ratio is None else r.max_ratio
        print(f"{r.status.upper():4s} {r.name} ({value})")
    failed = sum(r.status == "fail" for r in results)
    print(f"{len(results) - failed}/{len(results)} passed")
    return 1 if failed else 0


def _cmd_norm(args) -> int:
    spec = parse_norm_spec(args.spec)
    fn = read_gfn(args.infile)
    if isinstance(fn, ConfigFn):
        value = mod_norm(fn, spec, gaussian(fn.grid))
    else:
        w4 = weight4_from_expr(spec.weight) if spec.weight else None
        value = sympl_mod_norm(fn, spec.p, spec.q, spec.flavor, weight4=w4)
    print(repr(float(value)))
    return 0


def _symbol(path) -> PhaseFn:
    fn = read_gfn(path)
    if not isinstance(fn, PhaseFn):
        raise SystemExit(f"{path} holds a configuration-space function, expected a symbol")
    return fn


def _window(path, grid) -> ConfigFn:
    if path is None:
        return gaussian(grid)
    fn = read_gfn(path)
    if not isinstance(fn, ConfigFn):
        raise SystemExit(f"{path} holds a symbol, expected a window function")
    return fn


def _cmd_quantize(args) -> int:
    write_operator(args.out, op_t(_symbol(args.infile), args.t))
    return 0


def _cmd_schatten(args) -> int:
    a = _symbol(args.infile)
    H1 = make_space(weight_eval(args.w1, a.grid)) if args.w1 else l2_space(a.grid)
    H2 = make_space(weight_eval(args.w2, a.grid)) if args.w2 else l2_space(a.grid)
    print(repr(schatten_norm(a, args.t, args.p, H1, H2)))
    return 0


def _cmd_toeplitz(args) -> int:
    a = _symbol(args.infile)
    T = toeplitz(a, _window(args.h1, a.grid), _window(args.h2, a.grid), args.route, args.t)
    write_operator(args.out, T)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wcalc", description="Phase-space operator calculus toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("selftest", help="quick smoke run of core checks")
    p.set_defaults(func=_cmd_selftest)

    for name, func, help_ in (("identities", _cmd_identities, "run the identity suite"),
                              ("inequalities", _cmd_inequalities, "run the inequality suite"),
                              ("report", _cmd_report, "run both suites into one report")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--check", action="append", metavar="NAME", help="run only this check (repeatable)")
        p.add_argument("--config", metavar="PATH", help="JSON file with SuiteConfig fields")
        p.add_argument("--seed", type=int)
        p.add_argument("--count", type=int)
        p.add_argument("--out", metavar="PATH", required=name == "report",
                       help="report path (stdout when omitted)")
        p.set_defaults(func=func)

    p = sub.add_parser("norm", help="modulation norm of a stored function")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--spec", required=True, help="FLAVOR:p,q[:WEIGHT], e.g. M:2,2:sig(X,1)")
    p.set_defaults(func=_cmd_norm)

    p = sub.add_parser("quantize", help="t-quantization of a stored symbol")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_quantize)

    p = sub.add_parser("schatten", help="Schatten norm of a stored symbol")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--p", required=True)
    p.add_argument("--w1", metavar="EXPR", help="weight of the domain space")
    p.add_argument("--w2", metavar="EXPR", help="weight of the target space")
    p.set_defaults(func=_cmd_schatten)

    p = sub.add_parser("toeplitz", help="Toeplitz operator of a stored symbol")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--h1", help="analysis window file (default: normalized Gaussian)")
    p.add_argument("--h2", help="synthesis window file (default: normalized Gaussian)")
    p.add_argument("--route", choices=("direct", "weyl"), default="direct")
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_toeplitz)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return int(args.func(args))
    except (ValueError, OSError) as exc:
        print(f"wcalc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
