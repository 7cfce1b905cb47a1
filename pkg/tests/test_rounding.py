import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roundcheck.grades import Mode, RoundingConfig
from roundcheck.rounding import RoundingOverflow, is_representable, round_dir, round_sqrt
from roundcheck.rp import rp_distance, rp_leq

NEAREST = RoundingConfig(53, Mode.NEAREST)
UP = RoundingConfig(53, Mode.UP)
DOWN = RoundingConfig(53, Mode.DOWN)
ZERO = RoundingConfig(53, Mode.ZERO)

rationals = st.fractions(min_value=Fraction(-10**12), max_value=Fraction(10**12),
                         max_denominator=10**15).filter(lambda x: x != 0)


def directed_oracle(x: Fraction, up: bool) -> Fraction:
    # float(x) is correctly rounded to nearest; step one ulp if it landed on the wrong side
    f = float(x)
    if up and Fraction(f) < x:
        f = math.nextafter(f, math.inf)
    if not up and Fraction(f) > x:
        f = math.nextafter(f, -math.inf)
    return Fraction(f)


@settings(max_examples=500)
@given(rationals)
def test_matches_binary64(x):
    assert round_dir(x, NEAREST) == Fraction(float(x))
    assert round_dir(x, UP) == directed_oracle(x, up=True)
    assert round_dir(x, DOWN) == directed_oracle(x, up=False)
    assert round_dir(x, ZERO) == directed_oracle(x, up=x < 0)


@given(rationals, rationals)
def test_monotone(x, y):
    lo, hi = min(x, y), max(x, y)
    for cfg in (NEAREST, UP, DOWN, ZERO):
        assert round_dir(lo, cfg) <= round_dir(hi, cfg)


@given(rationals)
def test_idempotent_and_representable(x):
    for cfg in (NEAREST, UP):
        r = round_dir(x, cfg)
        assert is_representable(r, cfg)
        assert round_dir(r, cfg) == r


@given(st.fractions(min_value=Fraction(1, 10), max_value=Fraction(1000), max_denominator=10**9))
def test_rounding_stays_within_the_rnd_grade(x):
    assert rp_leq(rp_distance(x, round_dir(x, UP)), UP.rnd_grade)
    assert rp_leq(rp_distance(x, round_dir(x, NEAREST)), NEAREST.rnd_grade)


def test_ties_go_to_even():
    one = Fraction(1)
    ulp = Fraction(1, 2**52)
    assert round_dir(one + ulp / 2, NEAREST) == one
    assert round_dir(one + ulp + ulp / 2, NEAREST) == one + 2 * ulp


def test_up_just_above_one():
    assert round_dir(1 + Fraction(1, 2**60), UP) == 1 + Fraction(1, 2**52)


def test_subnormals():
    tiny = Fraction(1, 2**1074)
    assert round_dir(tiny, NEAREST) == tiny
    assert round_dir(tiny / 3, UP) == tiny
    assert round_dir(tiny / 3, NEAREST) == 0


def test_overflow():
    with pytest.raises(RoundingOverflow):
        round_dir(Fraction(2) ** 1024, UP)


@settings(max_examples=300)
@given(st.floats(min_value=1e-300, max_value=1e300))
def test_sqrt_matches_math(x):
    assert round_sqrt(Fraction(x), NEAREST) == Fraction(math.sqrt(x))
    up = round_sqrt(Fraction(x), UP)
    below = Fraction(math.nextafter(float(up), 0))
    assert up * up >= Fraction(x) > below * below


def test_rp_distance_guard():
    assert rp_distance(Fraction(0), Fraction(0)) == 0
    assert rp_distance(Fraction(1), Fraction(-1)) == math.inf
    assert rp_distance(Fraction(3), Fraction(3)) == 0
    d = rp_distance(Fraction(2), Fraction(1))
    assert d >= math.log(2)
