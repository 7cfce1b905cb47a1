from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roundcheck.bean import (
    BeanTypeError, LinearityError, check_bean_program, completeness_probe,
)
from roundcheck.bench import BOUND_K, GENERATORS, gen_dotprod
from roundcheck.grades import BEAN_CONFIG, Grade
from roundcheck.syntax import parse_bean, pretty_bean_type

from conftest import CORPUS, bean_file

eps = BEAN_CONFIG.eps
F = Fraction

GOLDEN = [
    ("dotprod2.bean", "DotProd2", {"x": F(3, 2), "y": F(3, 2)}),
    ("polyval.bean", "PolyVal", {"a": F(3)}),
    ("polyval.bean", "PolyVal'", {"a0": F(2), "a1": F(3), "a2": F(3)}),
    ("horner.bean", "Horner", {"a": F(4)}),
    ("horner.bean", "Horner'", {"a0": F(1), "a1": F(3), "a2": F(4)}),
    ("smatvecmul.bean", "InnerProduct", {"u": F(2)}),
    ("smatvecmul.bean", "MatVecMul", {"M": F(2)}),
    ("smatvecmul.bean", "ScaleVec", {"x": F(1)}),
    ("smatvecmul.bean", "SMatVecMul", {"M": F(4), "u": F(2)}),
    ("svecadd.bean", "SVecAdd", {"x": F(2), "y": F(1)}),
    ("linsolve.bean", "LinSolve", {"_arg1": F(5, 2), "_arg2": F(3, 2)}),
]


@pytest.mark.parametrize("file, decl, bounds", GOLDEN, ids=[g[1] for g in GOLDEN])
def test_corpus_bounds(file, decl, bounds):
    report = check_bean_program(bean_file(file)).decl(decl)
    assert report.bounds == {n: Grade(k * eps) for n, k in bounds.items()}


def test_discrete_parameters_carry_no_error():
    report = check_bean_program(bean_file("smatvecmul.bean")).decl("SMatVecMul")
    assert report.discrete == ["v", "a", "b"]
    assert set(report.bounds) == {"M", "u"}


def test_linsolve_type_and_lint():
    report = check_bean_program(bean_file("linsolve.bean")).decl("LinSolve")
    assert pretty_bean_type(report.type) == "dnum ⊗ num + err"
    assert any("a01" in w for w in report.lint)


@pytest.mark.parametrize("path", sorted((CORPUS / "bean" / "listings").glob("*.bean")),
                         ids=lambda p: p.name)
def test_listings_parse(path):
    assert parse_bean(path.read_text()).decls


def test_duplicated_linear_variable_is_rejected():
    text = (CORPUS / "negative" / "dup_linear.bean").read_text()
    with pytest.raises(LinearityError, match="'x' is used more than once"):
        check_bean_program(parse_bean(text))


def test_discrete_data_cannot_absorb_error():
    text = (CORPUS / "negative" / "discrete_absorb.bean").read_text()
    with pytest.raises(BeanTypeError, match="discrete data cannot absorb backward error"):
        check_bean_program(parse_bean(text))


def test_dmul_needs_a_discrete_first_argument():
    with pytest.raises(BeanTypeError, match="discrete first argument"):
        check_bean_program(parse_bean("F (x: num) (y: num) :=\n  dmul x y"))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 12), st.data())
def test_reusing_a_linear_input_is_rejected(n, data):
    i = data.draw(st.integers(0, n - 1))
    j = data.draw(st.integers(0, n - 1).filter(lambda k: k != i))
    text = gen_dotprod(n).replace(f"dmul y{j} x{j} in", f"dmul y{j} x{i} in")
    with pytest.raises(LinearityError):
        check_bean_program(parse_bean(text))


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["DotProd", "Horner", "PolyVal", "MatVecMul", "Sum"]), st.integers(2, 25))
def test_family_bounds_scale_linearly(family, n):
    report = check_bean_program(parse_bean(GENERATORS[family](n)))
    assert report.decls[-1].max_bound == Grade(BOUND_K[family](n) * eps)


def test_completeness_probe():
    program = bean_file("dotprod2.bean")
    ok = completeness_probe(program, "DotProd2", {"x": Grade(F(3, 2) * eps), "y": Grade(2 * eps)})
    assert ok.passed
    tight = completeness_probe(program, "DotProd2", {"x": Grade(eps), "y": Grade(2 * eps)})
    assert not tight.passed and "x" in tight.failures[0]


def test_json_report_fields():
    text = check_bean_program(bean_file("dotprod2.bean")).to_json()
    assert '"eps": "3/2eps"' in text
    assert '"decimal": "1.67e-16"' in text
