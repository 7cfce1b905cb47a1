from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from roundcheck.grades import (
    BEAN_CONFIG, INF, NUMFUZZ_CONFIG, ONE, ZERO, Grade, Mode, RoundingConfig, config_from_env,
    display, grade_max, multiple_of, parse_grade, rp_to_rel, sig_digits,
)

fractions = st.fractions(min_value=0, max_value=1000, max_denominator=1000)
grades = st.one_of(fractions.map(Grade), st.just(INF))


@given(grades, grades, grades)
def test_semiring_laws(a, b, c):
    assert a + b == b + a
    assert (a + b) + c == a + (b + c)
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a + ZERO == a
    assert a * ONE == a
    assert a * ZERO == ZERO  # including inf * 0
    if a.is_finite or not (b.is_zero and c.is_zero):
        assert a * (b + c) == a * b + a * c


@given(grades, grades, grades)
def test_order_is_monotone(a, b, c):
    if a <= b:
        assert a + c <= b + c
        assert a * c <= b * c
    assert a <= grade_max(a, b) and b <= grade_max(a, b)


@given(grades, st.one_of(fractions.filter(lambda x: x > 0).map(Grade), st.just(INF)))
def test_divide_is_least_scaling(t, s):
    q = t.divide(s)
    assert t <= s * q


def test_units():
    assert NUMFUZZ_CONFIG.u == Fraction(1, 2**52)
    assert BEAN_CONFIG.u == Fraction(1, 2**53)
    assert BEAN_CONFIG.eps == BEAN_CONFIG.u / (1 - BEAN_CONFIG.u)
    assert NUMFUZZ_CONFIG.rnd_grade == Grade(NUMFUZZ_CONFIG.u)
    assert RoundingConfig(53, Mode.DOWN).rnd_grade.value > Fraction(1, 2**52)


def test_rp_to_rel():
    e = BEAN_CONFIG.eps
    assert rp_to_rel(Grade(e)) == e / (1 - e)
    with pytest.raises(ValueError):
        rp_to_rel(INF)


@pytest.mark.parametrize("value, text", [
    (Fraction(2, 2**52), "4.44e-16"),
    (Fraction(7, 2**52), "1.55e-15"),
    (Fraction(1, 3), "3.33e-01"),
    (Fraction(999500), "1.00e+06"),
])
def test_sig_digits(value, text):
    assert sig_digits(value) == text


def test_display_and_multiples():
    u = NUMFUZZ_CONFIG.u
    assert display(Grade(2 * u), u, "u") == "2u (4.44e-16)"
    assert multiple_of(Grade(u * Fraction(3, 2)), u, "eps") == "3/2eps"
    assert display(INF) == "inf"


@pytest.mark.parametrize("text, expected", [
    ("2u", Grade(2 * NUMFUZZ_CONFIG.u)),
    ("u", Grade(NUMFUZZ_CONFIG.u)),
    ("1/2", Grade(Fraction(1, 2))),
    ("inf", INF),
    ("1.11e-16", Grade(Fraction("1.11e-16"))),
])
def test_parse_grade(text, expected):
    assert parse_grade(text) == expected


def test_parse_grade_rejects_garbage():
    with pytest.raises(ValueError):
        parse_grade("two u")


def test_env_override(monkeypatch):
    monkeypatch.setenv("ROUNDCHECK_U", "1/1024")
    assert config_from_env(NUMFUZZ_CONFIG).u == Fraction(1, 1024)
    monkeypatch.setenv("ROUNDCHECK_U", "tiny")
    with pytest.raises(ValueError):
        config_from_env(NUMFUZZ_CONFIG)


def test_negative_grade_rejected():
    with pytest.raises(ValueError):
        Grade(Fraction(-1))
