"""Command line entry point: ``roundcheck``."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import bench
from .bean import BeanTypeError, check_bean_program
from .grades import BEAN_CONFIG, NUMFUZZ_CONFIG, config_from_env, display, sig_digits
from .interp import validate_program
from .lens import LensError, witness_from_json, witness_sweep
from .numfuzz import TypeCheckError, check_program
from .rounding import RoundingOverflow
from .syntax import ParseError, parse_bean, parse_numfuzz, pretty_bean_type, pretty_type


def _box(text: str) -> tuple[Fraction, Fraction]:
    try:
        lo, hi = (Fraction(p.strip()) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo,hi, got {text!r}") from None
    if not 0 < lo <= hi:
        raise argparse.ArgumentTypeError("the box must satisfy 0 < lo <= hi")
    return lo, hi


def _load(lang: str, path: str, config):
    text = Path(path).read_text(encoding="utf-8")
    return parse_bean(text) if lang == "bean" else parse_numfuzz(text, config)


def cmd_check(args) -> int:
    if args.lang == "nfz":
        config = config_from_env(NUMFUZZ_CONFIG)
        report = check_program(_load("nfz", args.file, config), config, trace=args.trace)
        if args.json:
            print(report.to_json(with_trace=args.trace))
            return 0
        for d in report.decls:
            print(f"{d.name} : {pretty_type(d.type, config)}")
            if d.grade is not None:
                print(f"  bound: {display(d.grade, config.u, 'u')}")
        return 0
    config = config_from_env(BEAN_CONFIG)
    report = check_bean_program(_load("bean", args.file, config), config, trace=args.trace)
    if args.json:
        print(report.to_json(with_trace=args.trace))
        return 0
    for d in report.decls:
        print(f"{d.name} : {pretty_bean_type(d.type)}")
        for name, g in d.bounds.items():
            print(f"  {name}: {display(g, config.eps, 'eps') if not g.is_zero else '0'}")
        for z in d.discrete:
            print(f"  {z}: discrete")
        for w in d.lint:
            print(f"  warning: {w}")
    return 0


def cmd_validate(args) -> int:
    if args.lang == "nfz":
        config = config_from_env(NUMFUZZ_CONFIG)
        program = _load("nfz", args.file, config)
        reports = validate_program(program, args.samples, args.seed, args.box, config)
        if args.decl:
            reports = [r for r in reports if r.decl == args.decl]
        ok = all(r.passed for r in reports)
        if args.json:
            print(json.dumps({"config": config.describe(), "seed": args.seed,
                              "samples": args.samples, "passed": ok,
                              "decls": [r.to_json() for r in reports]}, indent=2))
        else:
            for r in reports:
                if r.skipped:
                    print(f"{r.decl}: skipped ({r.skipped})")
                    continue
                status = "ok" if r.passed else f"{r.violations} VIOLATIONS"
                print(f"{r.decl}: {status}; max RP {sig_digits(Fraction(str(r.max_observed)))}"
                      f" vs bound {display(r.bound, config.u, 'u')} (ratio {r.max_ratio:.3f}),"
                      f" {r.samples} samples, seed {r.seed}")
        return 0 if ok else 1
    config = config_from_env(BEAN_CONFIG)
    program = _load("bean", args.file, config)
    lo, hi = args.box
    rows = []
    ok = True
    for d in program.decls:
        if args.decl and d.name != args.decl:
            continue
        try:
            failures, worst_res, worst = witness_sweep(
                program, d.name, args.samples, args.seed, config, (float(lo), float(hi)), signed=False)
        except LensError as exc:
            rows.append({"decl": d.name, "skipped": str(exc)})
            continue
        ok = ok and failures == 0
        rows.append({"decl": d.name, "failures": failures, "max_residual": float(worst_res),
                     "max_ratio": {n: round(v, 6) for n, v in worst.items()}})
    if args.json:
        print(json.dumps({"config": config.describe(), "seed": args.seed, "samples": args.samples,
                          "passed": ok, "decls": rows}, indent=2))
    else:
        for r in rows:
            if "skipped" in r:
                print(f"{r['decl']}: skipped ({r['skipped']})")
                continue
            ratios = ", ".join(f"{n} {v:.3f}" for n, v in r["max_ratio"].items())
            status = "ok" if r["failures"] == 0 else f"{r['failures']} FAILURES"
            print(f"{r['decl']}: {status}; worst rp/bound: {ratios}")
    return 0 if ok else 1


def cmd_witness(args) -> int:
    config = config_from_env(BEAN_CONFIG)
    program = _load("bean", args.file, config)
    name = args.decl or program.decls[-1].name
    text = args.input
    if text.startswith("@"):
        text = Path(text[1:]).read_text(encoding="utf-8")
    data = json.loads(text)
    report = witness_from_json(program, name, data, config)
    print(json.dumps(report.to_json(), indent=2))
    return 0 if report.passed else 1


def cmd_bench(args) -> int:
    config = bench.suite_config(args.suite)
    results = bench.run_bench(args.suite, args.sizes, args.family, config)
    print(bench.emit_report(results, args.format, not args.no_timing, config), end="")
    if args.format == "json":
        print()
    return bench.exit_code(results)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="roundcheck", description="Static rounding-error bounds.")
    sub = p.add_subparsers(dest="command", required=True)
    for lang in ("nfz", "bean"):
        lp = sub.add_parser(lang, help=f"{'NumFuzz' if lang == 'nfz' else 'Bean'} programs")
        lsub = lp.add_subparsers(dest="action", required=True)
        c = lsub.add_parser("check", help="infer error bounds")
        c.add_argument("file")
        c.add_argument("--json", action="store_true")
        c.add_argument("--trace", action="store_true", help="include the rule trace")
        c.set_defaults(func=cmd_check, lang=lang)
        v = lsub.add_parser("validate", help="compare bounds against sampled executions")
        v.add_argument("file")
        v.add_argument("--samples", type=int, default=1000)
        v.add_argument("--seed", type=int, default=0)
        v.add_argument("--box", type=_box, default=(Fraction(1, 10), Fraction(1000)))
        v.add_argument("--decl", help="only this declaration")
        v.add_argument("--json", action="store_true")
        v.set_defaults(func=cmd_validate, lang=lang)
        if lang == "bean":
            w = lsub.add_parser("witness", help="backward-error witness for one input")
            w.add_argument("file")
            w.add_argument("--input", required=True, help="JSON object of inputs, or @file")
            w.add_argument("--decl", help="declaration (default: the last one)")
            w.set_defaults(func=cmd_witness, lang=lang)
    b = sub.add_parser("bench", help="reproduce the bound tables")
    b.add_argument("--suite", choices=bench.SUITES, required=True)
    b.add_argument("--sizes", type=int, nargs="+")
    b.add_argument("--family", nargs="+")
    b.add_argument("--format", choices=("json", "markdown"), default="json")
    b.add_argument("--no-timing", action="store_true", help="omit timings (byte-stable output)")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, TypeCheckError, BeanTypeError) as exc:
        where = getattr(args, "file", None)
        print(f"{where}:{exc}" if where else str(exc), file=sys.stderr)
        return 1
    except (LensError, bench.BenchError, RoundingOverflow, ValueError, KeyError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
