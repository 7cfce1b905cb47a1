from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from roundcheck.bench import GENERATORS
from roundcheck.grades import INF, Grade, NUMFUZZ_CONFIG
from roundcheck.syntax import (
    ParseError, parse_bean, parse_bean_type_text, parse_nfz_type_text, parse_numfuzz, pretty,
    pretty_bean_type, pretty_program, pretty_type,
)
from roundcheck.syntax.terms import Const, LetPair, Op, Pair, Var
from roundcheck.syntax.types import (
    DNUM, ERR, NUM, UNIT, Bang, Lolli, Monad, Sum, Tensor, With, matrix, vector,
)

from conftest import CORPUS

u = NUMFUZZ_CONFIG.u
nfz_grades = st.one_of(
    st.integers(0, 20).map(lambda k: Grade(k * u)),
    st.fractions(0, 10, max_denominator=8).map(Grade),
    st.just(INF),
)
nfz_types = st.recursive(
    st.sampled_from([NUM, UNIT]),
    lambda inner: st.one_of(
        st.builds(Tensor, inner, inner),
        st.builds(With, inner, inner),
        st.builds(Sum, inner, inner),
        st.builds(Lolli, inner, inner),
        st.builds(Bang, nfz_grades, inner),
        st.builds(Monad, nfz_grades, inner),
    ),
    max_leaves=8,
)
bean_types = st.recursive(
    st.sampled_from([NUM, DNUM, UNIT, ERR]),
    lambda inner: st.one_of(st.builds(Tensor, inner, inner), st.builds(Sum, inner, inner)),
    max_leaves=8,
)


@given(nfz_types)
def test_nfz_type_round_trip(t):
    assert parse_nfz_type_text(pretty_type(t)) == t


@given(bean_types)
def test_bean_type_round_trip(t):
    assert parse_bean_type_text(pretty_bean_type(t)) == t


def test_vector_shorthand():
    assert parse_bean_type_text("num3") == vector(3)
    assert parse_bean_type_text("dnum2x2") == matrix(2, 2, DNUM)
    assert pretty_bean_type(matrix(2, 3)) == "num2x3"


@pytest.mark.parametrize("path", sorted((CORPUS / "nfz").glob("*.nfz")), ids=lambda p: p.name)
def test_nfz_corpus_round_trip(path):
    p = parse_numfuzz(path.read_text())
    assert parse_numfuzz(pretty_program(p)) == p


@pytest.mark.parametrize("path", sorted((CORPUS / "bean").rglob("*.bean")), ids=lambda p: p.name)
def test_bean_corpus_round_trip(path):
    p = parse_bean(path.read_text())
    assert parse_bean(pretty_program(p)) == p


@pytest.mark.parametrize("family", sorted(GENERATORS))
def test_generated_round_trip(family):
    text = GENERATORS[family](3)
    parse = parse_numfuzz if family.startswith("Nf") else parse_bean
    p = parse(text)
    assert parse(pretty_program(p)) == p


def test_tuple_patterns_nest_right():
    p = parse_bean("F (x: num3) :=\n  let (a, b, c) = x in\n  (a, b, c)")
    body = p.decls[0].body
    assert isinstance(body, LetPair) and body.left == "a"
    assert isinstance(body.body, LetPair) and body.body.bound == Var(body.right)
    pair = body.body.body
    assert pair == Pair(Var("a"), Pair(Var("b"), Var("c")))


def test_literals_are_exact():
    p = parse_numfuzz("function f (x: num) {\n  rnd (mul (x, 0.1))\n}")
    op = p.decls[0].body.body
    assert isinstance(op, Op) and op.args[0].right == Const(Fraction(1, 10))


def test_signature_grades():
    p = parse_numfuzz("f : num ⊸ M[2u]num\nfunction f (x: num) {\n  rnd x\n}")
    assert p.signatures[0].type == Lolli(NUM, Monad(Grade(2 * u), NUM))


@pytest.mark.parametrize("text, message", [
    ("F (x: num) :=\n  rnd x", "NumFuzz-only"),
    ("F (x: num) :=\n  G x", "unknown"),
    ("F (x: num) :=\n  let y = in y", "expected"),
])
def test_bean_parse_errors(text, message):
    with pytest.raises(ParseError, match=message):
        parse_bean(text)


def test_parse_error_positions():
    with pytest.raises(ParseError) as info:
        parse_numfuzz("function f (x: num) {\n  rnd (x\n}")
    assert info.value.line == 3


def test_pretty_dispatch():
    assert pretty(Monad(Grade(u), NUM)) == "M[u]num"
    assert pretty(vector(2), language="bean") == "num2"
