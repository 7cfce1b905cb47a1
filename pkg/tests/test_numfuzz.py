from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roundcheck.grades import INF, NUMFUZZ_CONFIG, Grade, Mode, RoundingConfig
from roundcheck.numfuzz import (
    TypeCheckError, check_program, replay_side_conditions, subtype, subtype_failure, type_max,
    type_min,
)
from roundcheck.syntax import parse_numfuzz, pretty_type
from roundcheck.syntax.types import NUM, Bang, Lolli, Monad, Sum, Tensor, With

from conftest import CORPUS, nfz_file
from test_syntax import nfz_types

u = NUMFUZZ_CONFIG.u

GOLDEN = [
    ("ma.nfz", "MA", 2 * u),
    ("fma.nfz", "FMA", u),
    ("horner2.nfz", "Horner2", 2 * u),
    ("horner2_with_error.nfz", "Horner2_with_error", 7 * u),
    ("fold3.nfz", "Horner2_fold", 2 * u),
    ("pow4.nfz", "pow2", u),
    ("pow4.nfz", "pow4", 3 * u),
    ("case1.nfz", "case1", u),
    ("one_by_sqrtxx.nfz", "one_by_sqrtxx", Fraction(5, 2) * u),
]


@pytest.mark.parametrize("file, decl, bound", GOLDEN, ids=[g[1] for g in GOLDEN])
def test_corpus_bounds(file, decl, bound):
    report = check_program(nfz_file(file))
    assert report.decl(decl).grade == Grade(bound)


def test_sensitivities_read_off_bangs():
    report = check_program(nfz_file("pow4.nfz"))
    [(name, _, s)] = report.decl("pow4").params
    assert name == "x" and s == Grade(4)
    case1 = check_program(nfz_file("case1.nfz")).decl("case1")
    assert case1.params[0][2] == INF
    assert pretty_type(case1.type) == "![inf]num ⊸ M[u]num"


def test_insufficient_grade_is_rejected():
    text = (CORPUS / "negative" / "exp2_foo.nfz").read_text()
    with pytest.raises(TypeCheckError) as info:
        check_program(parse_numfuzz(text))
    assert "expected 1.11e-16 ≤ 2.17e-19" in str(info.value)
    assert info.value.span == (10, 3)


def test_signature_too_tight_is_rejected():
    text = "function f (x: num) {\n  rnd x\n}\nf : num ⊸ M[0]num"
    with pytest.raises(TypeCheckError, match="mismatched types"):
        check_program(parse_numfuzz(text))


def test_duplicated_use_needs_a_bang():
    text = "function sq (x: num) {\n  rnd (mul (x, x))\n}"
    with pytest.raises(TypeCheckError, match="sensitivity"):
        check_program(parse_numfuzz(text))


def test_rounding_mode_changes_the_unit():
    down = RoundingConfig(53, Mode.DOWN)
    text = (CORPUS / "nfz" / "ma.nfz").read_text()
    unsigned = "\n".join(ln for ln in text.splitlines() if not ln.startswith("MA :"))
    report = check_program(parse_numfuzz(unsigned, down), down)
    assert report.decl("MA").grade == Grade(2 * down.eps)
    # the declared 2u no longer covers two round-down steps
    with pytest.raises(TypeCheckError, match="mismatched types"):
        check_program(parse_numfuzz(text, down), down)


def test_trace_side_conditions_hold():
    report = check_program(nfz_file("horner2_with_error.nfz"), trace=True)
    for d in report.decls:
        assert d.trace
        assert replay_side_conditions(d.trace) == []


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from(["addfp", "mulfp"]), min_size=1, max_size=12))
def test_monadic_sequencing_adds_grades(ops):
    # each step consumes the previous result and a fresh parameter
    params = ", ".join(f"x{i}: num" for i in range(len(ops) + 1))
    lines, acc = [], "x0"
    for i, op in enumerate(ops, 1):
        arg = f"⟨{acc}, x{i}⟩" if op == "addfp" else f"({acc}, x{i})"
        lines.append(f"let s{i} = {op} {arg};")
        acc = f"s{i}"
    text = "function f (" + params + ") {\n" + "\n".join(lines) + f"\nret {acc}\n}}"
    report = check_program(parse_numfuzz(text))
    assert report.decl("f").grade == Grade(len(ops) * u)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 3))
def test_weakening_with_an_unused_parameter(k):
    base = check_program(nfz_file("fma.nfz")).decl("FMA")
    text = ("function FMA (x: num, y: num, z: num, w: ![%d]num) {\n"
            "  a = mul (x,y);\n  b = add ⟨a,z⟩;\n  rnd b\n}" % k)
    weak = check_program(parse_numfuzz(text)).decl("FMA")
    assert weak.grade == base.grade
    assert [s for _, _, s in weak.params[:3]] == [s for _, _, s in base.params]


# ---------------------------------------------------------------- subtyping


def regrade(t, data):
    """A type of the same shape as t with fresh grades."""
    grade = st.one_of(st.integers(0, 6).map(lambda k: Grade(k * u)), st.just(INF))
    if isinstance(t, (Tensor, With, Sum)):
        return type(t)(regrade(t.left, data), regrade(t.right, data))
    if isinstance(t, Lolli):
        return Lolli(regrade(t.dom, data), regrade(t.cod, data))
    if isinstance(t, (Bang, Monad)):
        return type(t)(data.draw(grade), regrade(t.inner, data))
    return t


@given(nfz_types)
def test_subtyping_is_reflexive(t):
    assert subtype(t, t)


@settings(max_examples=200)
@given(nfz_types, st.data())
def test_max_and_min_bound_both_sides(t, data):
    a, b, c = regrade(t, data), regrade(t, data), regrade(t, data)
    hi, lo = type_max(a, b), type_min(a, b)
    assert subtype(a, hi) and subtype(b, hi)
    assert subtype(lo, a) and subtype(lo, b)
    # transitivity through the join
    assert subtype(a, type_max(hi, c))
    if subtype(a, b) and subtype(b, c):
        assert subtype(a, c)


def test_subtyping_directions():
    small, big = Monad(Grade(u), NUM), Monad(Grade(2 * u), NUM)
    assert subtype(small, big) and not subtype(big, small)
    assert subtype(Bang(Grade(2), NUM), Bang(Grade(1), NUM))
    assert subtype(Lolli(big, small), Lolli(small, big))
    assert subtype_failure(big, small) == "expected 4.44e-16 ≤ 2.22e-16"
    near = Monad(Grade(2 * u + u / 1000), NUM)
    assert subtype_failure(near, big) == "expected 4.443e-16 ≤ 4.441e-16"


def test_join_rejects_different_shapes():
    with pytest.raises(TypeCheckError):
        type_max(NUM, Tensor(NUM, NUM))
