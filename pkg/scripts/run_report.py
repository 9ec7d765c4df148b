"""Run both verification suites and write one JSON report.

Usage: python3 scripts/run_report.py OUT.json [--config CFG.json] [--seed S] [--count K]
"""
import argparse
import dataclasses
import sys

from wcalc.harness import SuiteConfig, emit_report, run_identity_suite, run_inequality_suite


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out", help="report path")
    ap.add_argument("--config", help="JSON file with SuiteConfig fields")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--count", type=int)
    args = ap.parse_args(argv)

    cfg = SuiteConfig.from_json(args.config) if args.config else SuiteConfig()
    overrides = {k: v for k, v in (("seed", args.seed), ("count", args.count)) if v is not None}
    cfg = dataclasses.replace(cfg, **overrides)
    results = run_identity_suite(cfg) + run_inequality_suite(cfg)
    code = emit_report(results, args.out, cfg.record_time)
    failed = [r.name for r in results if r.status == "fail"]
    print(f"{len(results)} checks, {len(failed)} failed -> {args.out}")
    for name in failed:
        print(f"  FAIL {name}")
    return code


if __name__ == "__main__":
    sys.exit(main())
