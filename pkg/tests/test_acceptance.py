"""Acceptance criteria 1-7.  Each test prints one PASS/FAIL line before asserting."""

import time
from fractions import Fraction

import pytest

from roundcheck.bean import LinearityError, check_bean_program
from roundcheck.bench import GOLDENS, emit_report, run_bench, run_entry
from roundcheck.grades import BEAN_CONFIG, BEAN_FZ_CONFIG, NUMFUZZ_CONFIG, Grade, rp_to_rel
from roundcheck.interp import validate_program
from roundcheck.lens import check_lens_laws, prim_lens, witness_sweep
from roundcheck.numfuzz import TypeCheckError, check_program
from roundcheck.syntax import parse_bean, parse_numfuzz

from conftest import CORPUS, bean_file, nfz_file

u = NUMFUZZ_CONFIG.u
eps = BEAN_CONFIG.eps
F = Fraction


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nacceptance criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
        assert ok, detail
    return emit


def test_criterion_1_numfuzz_goldens(report):
    start = time.perf_counter()
    wrong = []
    for file, decl, k in [("ma.nfz", "MA", 2), ("fma.nfz", "FMA", 1), ("horner2.nfz", "Horner2", 2),
                          ("horner2_with_error.nfz", "Horner2_with_error", 7)]:
        got = check_program(nfz_file(file)).decl(decl).grade
        if got != Grade(k * u):
            wrong.append(f"{decl}: {got}")
    for n in (5, 10, 20, 50, 75, 100):
        r = run_entry("large", "NfHorner", n)
        if not (r.match and r.reported == n * u):
            wrong.append(f"Horner{n}: {r.reported}")
    elapsed = time.perf_counter() - start
    ok = not wrong and elapsed < 10
    report(1, ok, f"{len(wrong)} mismatches {wrong}, {elapsed:.2f}s")


def test_criterion_2_bean_goldens(report):
    wrong = []
    expected = [
        ("dotprod2.bean", "DotProd2", {"x": F(3, 2), "y": F(3, 2)}),
        ("polyval.bean", "PolyVal", {"a": F(3)}),
        ("horner.bean", "Horner", {"a": F(4)}),
        ("horner.bean", "Horner'", {"a0": F(1), "a1": F(3), "a2": F(4)}),
        ("smatvecmul.bean", "SMatVecMul", {"M": F(4), "u": F(2)}),
        ("linsolve.bean", "LinSolve", {"_arg1": F(5, 2), "_arg2": F(3, 2)}),
    ]
    for file, decl, bounds in expected:
        got = check_bean_program(bean_file(file)).decl(decl).bounds
        if got != {n: Grade(k * eps) for n, k in bounds.items()}:
            wrong.append(decl)
    rows = run_bench("std")
    wrong += [r.label for r in rows if not r.match]
    table = {(g.family, g.size) for g in GOLDENS["std"]}
    missing = table - {(r.family, r.size) for r in rows}
    report(2, not wrong and not missing,
           f"{len(expected)} corpus decls, {len(rows)} std rows, mismatches {wrong}, "
           f"missing {sorted(missing)}")


def test_criterion_3_bench_fz(report):
    want = {"Sum500": "1.11e-13", "DotProd500": "1.11e-13", "Horner500": "2.22e-13",
            "PolyVal100": "2.24e-14"}
    wrong = []
    for g in GOLDENS["fz"]:
        r = run_entry("fz", g.family, g.size)
        exact = rp_to_rel(g.k * BEAN_FZ_CONFIG.eps)
        if not (r.match and r.reported == exact and r.display_consistent
                and want[r.label] == g.decimal):
            wrong.append(r.label)
    report(3, not wrong, f"{len(GOLDENS['fz'])} rows, mismatches {wrong}")


def test_criterion_4_forward_soundness(report):
    start = time.perf_counter()
    checked = violations = 0
    failed = []
    for path in sorted((CORPUS / "nfz").glob("*.nfz")):
        for r in validate_program(parse_numfuzz(path.read_text()), samples=1000, seed=0,
                                  box=(F(1, 10), F(1000))):
            if r.skipped:
                continue
            checked += 1
            violations += r.violations
            if not r.passed:
                failed.append(r.decl)
    elapsed = time.perf_counter() - start
    ok = violations == 0 and checked > 0 and elapsed < 120
    report(4, ok, f"{checked} decls x 1000 samples, {violations} violations {failed}, "
                  f"{elapsed:.1f}s")


def test_criterion_5_lens_laws(report):
    problems = []
    for name in ("add", "sub", "dmul", "mul", "div"):
        law = check_lens_laws(prim_lens(name), samples=10_000, seed=0)
        exact_needed = name in ("add", "sub", "dmul")
        if not law.passed or (exact_needed and not law.exact) or law.max_residual > 1e-30:
            problems.append(f"{name}: p1 {law.property1_failures}, p2 {law.property2_failures}, "
                            f"residual {law.max_residual}")
    failures, worst, ratios = witness_sweep(bean_file("dotprod2.bean"), "DotProd2",
                                            samples=1000, seed=0)
    if failures or worst > 1e-30 or max(ratios.values()) > 1:
        problems.append(f"DotProd2: {failures} failures, residual {worst}, rp/bound {ratios}")
    report(5, not problems, f"5 primitives x 10^4, DotProd2 x 10^3, problems {problems}")


def test_criterion_6_negatives(report):
    notes = []
    try:
        check_bean_program(parse_bean((CORPUS / "negative" / "dup_linear.bean").read_text()))
        notes.append("duplicated linear variable accepted")
    except LinearityError as exc:
        if "more than once" not in str(exc):
            notes.append(f"unexpected message: {exc}")
    try:
        check_program(parse_numfuzz((CORPUS / "negative" / "exp2_foo.nfz").read_text()))
        notes.append("insufficient grade accepted")
    except TypeCheckError as exc:
        if "expected" not in str(exc) or "≤" not in str(exc):
            notes.append(f"unexpected message: {exc}")
    report(6, not notes, "; ".join(notes) or "both programs rejected with located messages")


def test_criterion_7_timing_is_informational(report):
    rows = run_bench("fz", families=["Sum"])
    timed = emit_report(rows, "markdown", with_timing=True)
    untimed = emit_report(rows, "markdown", with_timing=False)
    # verdicts must not depend on the time column
    strip = [ln.rsplit("|", 2)[0] + "|" for ln in timed.splitlines()[2:]]
    ok = "time (s)" in timed and strip == untimed.splitlines()[2:]
    report(7, ok, "timings are reported but never compared")
