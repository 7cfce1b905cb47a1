import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roundcheck.bench import (
    GENERATORS, GOLDENS, OPS, BenchError, BenchSpec, count_ops, emit_report, exit_code,
    parse_benchmark, printed_forms, run_bench, run_entry, suite_entries,
)
from roundcheck.grades import BEAN_CONFIG, NUMFUZZ_CONFIG

families = st.sampled_from(sorted(GENERATORS))


@settings(max_examples=40, deadline=None)
@given(families, st.integers(2, 12))
def test_generated_op_counts(family, n):
    language = "nfz" if family.startswith("Nf") else "bean"
    program = parse_benchmark(BenchSpec(family, n, language, NUMFUZZ_CONFIG))
    assert count_ops(program) == OPS[family](n)


@pytest.mark.parametrize("golden", GOLDENS["std"], ids=lambda g: f"{g.family}{g.size}")
def test_std_rows(golden):
    r = run_entry("std", golden.family, golden.size)
    assert r.match, r.to_json()
    assert r.reported == golden.k * BEAN_CONFIG.eps
    assert r.display_consistent


@pytest.mark.parametrize("golden", [g for g in GOLDENS["large"]
                                    if g.family != "NfMatrixMultiply" or g.size <= 16],
                         ids=lambda g: f"{g.family}{g.size}")
def test_large_rows(golden):
    r = run_entry("large", golden.family, golden.size)
    assert r.match, r.to_json()
    assert r.reported == golden.k * NUMFUZZ_CONFIG.u
    assert r.display_consistent


def test_printed_forms():
    u = NUMFUZZ_CONFIG.u
    assert printed_forms(75 * u) == {"1.67e-14", "1.66e-14"}
    assert printed_forms(Fraction(1, 8)) == {"1.25e-01"}


def test_ops_notes():
    r = run_entry("std", "Sum", 100)
    assert r.ops == 99 and r.ops_match
    assert any("prints 100 ops" in n for n in r.notes)


def test_markdown_report():
    results = run_bench("std", families=["DotProd"], sizes=[20, 7])
    text = emit_report(results, "markdown", with_timing=False)
    lines = text.splitlines()
    assert lines[0].startswith("| benchmark |") and "time" not in lines[0]
    assert "| DotProd20 | 39 | 2.22e-15 | 20eps | 2.22e-15 | ✓ |" in text
    assert "| DotProd7 |" in text and exit_code(results) == 0


def test_failures_set_the_exit_code():
    r = run_entry("std", "DotProd", 20)
    r.expected = r.expected * 2
    assert not r.match and exit_code([r]) == 1
    assert "✗" in emit_report([r], "markdown")


def test_json_is_deterministic_without_timing():
    a = emit_report(run_bench("fz", families=["Sum"]), "json", with_timing=False)
    b = emit_report(run_bench("fz", families=["Sum"]), "json", with_timing=False)
    assert a == b
    doc = json.loads(a)
    assert doc["all_match"]
    assert "seconds" not in doc["results"][0]


def test_errors_are_recorded_not_raised():
    r = run_entry("std", "DotProd", 5000)
    assert r.error and not r.match


def test_unknown_suite_and_family():
    with pytest.raises(BenchError):
        suite_entries("huge")
    with pytest.raises(BenchError):
        suite_entries("std", families=["NfHorner"])
    with pytest.raises(BenchError):
        emit_report([], "csv")


def test_empty_report():
    doc = json.loads(emit_report([], "json"))
    assert doc == {"results": [], "all_match": True}
