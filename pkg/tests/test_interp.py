from fractions import Fraction

import mpmath
import pytest

from roundcheck.grades import BEAN_CONFIG, NUMFUZZ_CONFIG, Grade
from roundcheck.interp import (
    ERR_V, IDEAL, InlV, InrV, PairV, RetV, UNIT_V, call_bean, call_nfz, fp, validate_forward,
    validate_program, value_distance,
)
from roundcheck.rounding import round_dir
from roundcheck.syntax.types import NUM, Sum, Tensor, UNIT, With

from conftest import CORPUS, bean_file, nfz_file

u = NUMFUZZ_CONFIG.u
F = Fraction


def test_fma_rounds_once():
    program = nfz_file("fma.nfz")
    args = [F(1, 10), F(3), F(1, 5)]
    ideal = call_nfz(program, "FMA", args, IDEAL)
    approx = call_nfz(program, "FMA", args, fp(NUMFUZZ_CONFIG))
    assert ideal == RetV(F(1, 2))
    assert approx == RetV(round_dir(F(1, 2), NUMFUZZ_CONFIG))


def test_ma_rounds_twice():
    program = nfz_file("ma.nfz")
    x, y, z = F(1, 3), F(3), F(1, 7)
    approx = call_nfz(program, "MA", [x, y, z], fp(NUMFUZZ_CONFIG))
    step = round_dir(x * y, NUMFUZZ_CONFIG)
    assert approx == RetV(round_dir(step + z, NUMFUZZ_CONFIG))


def test_case_follows_the_sign():
    program = nfz_file("case1.nfz")
    assert call_nfz(program, "case1", [F(3)], IDEAL) == RetV(F(9))
    assert call_nfz(program, "case1", [F(-3)], IDEAL) == RetV(F(0))


def test_sqrt_is_irrational_in_the_ideal_run():
    program = nfz_file("one_by_sqrtxx.nfz")
    v = call_nfz(program, "one_by_sqrtxx", [F(2)], IDEAL)
    assert v == RetV(F(1, 2))
    v = call_nfz(program, "one_by_sqrtxx", [F(3, 7)], fp(NUMFUZZ_CONFIG))
    assert isinstance(v.value, Fraction)


def test_bean_division_by_zero_is_an_error_value():
    program = bean_file("linsolve.bean")
    a = PairV(PairV(F(0), F(0)), PairV(F(1), F(2)))
    args = {"_arg1": a, "_arg2": PairV(F(1), F(1))}
    assert call_bean(program, "LinSolve", args, fp(BEAN_CONFIG)) == InrV(ERR_V)
    args["_arg1"] = PairV(PairV(F(2), F(0)), PairV(F(1), F(4)))
    out = call_bean(program, "LinSolve", args, IDEAL)
    assert out == InlV(PairV(F(1, 2), F(1, 8)))


def test_value_distance():
    a = PairV(F(1), F(2))
    b = PairV(F(2), F(2))
    with mpmath.workprec(320):
        d = value_distance(Tensor(NUM, NUM), a, b)
        assert abs(d - mpmath.log(2)) < 1e-30
        w = value_distance(With(NUM, NUM), PairV(F(1), F(4), True), PairV(F(2), F(8), True))
        assert abs(w - mpmath.log(2)) < 1e-30
    assert value_distance(Sum(UNIT, UNIT), InlV(UNIT_V), InrV(UNIT_V)) == mpmath.inf


@pytest.mark.parametrize("path", sorted((CORPUS / "nfz").glob("*.nfz")), ids=lambda p: p.name)
def test_corpus_is_forward_sound(path):
    from roundcheck.syntax import parse_numfuzz

    for r in validate_program(parse_numfuzz(path.read_text()), samples=200, seed=11):
        assert r.passed, r.to_json()


def test_validator_catches_a_bound_that_is_too_small():
    r = validate_forward(nfz_file("ma.nfz"), "MA", samples=200, seed=1, bound=Grade(u / 100))
    assert r.violations > 0 and r.first_violation is not None


def test_validation_is_deterministic():
    a = validate_forward(nfz_file("horner2.nfz"), "Horner2", samples=50, seed=5)
    b = validate_forward(nfz_file("horner2.nfz"), "Horner2", samples=50, seed=5)
    assert a.to_json() == b.to_json()
    assert a.to_json()["seed"] == 5


def test_function_parameters_are_skipped():
    r = validate_forward(nfz_file("fold3.nfz"), "fold3", samples=10)
    assert r.skipped and r.passed
