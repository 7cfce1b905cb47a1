"""Correct rounding of exact rationals into a binary format.

Nothing here touches the host FPU: the exponent comes from bit lengths and
the rounded significand from integer floor/ceil, so every mode and precision
is reproducible.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt

from .grades import Mode, RoundingConfig
from .numeric import Real, is_exact, to_fraction


class RoundingOverflow(ArithmeticError):
    pass


def _floor_log2(a: Fraction) -> int:
    """floor(log2 a) for a > 0."""
    e = a.numerator.bit_length() - a.denominator.bit_length()
    if _pow2(e) > a:
        e -= 1
    elif _pow2(e + 1) <= a:
        e += 1
    return e


def _pow2(e: int) -> Fraction:
    return Fraction(2**e) if e >= 0 else Fraction(1, 2 ** (-e))


def _magnitude_mode(mode: Mode, negative: bool) -> str:
    """Rounding direction for |x|: 'down', 'up' or 'nearest'."""
    if mode is Mode.NEAREST:
        return "nearest"
    if mode is Mode.ZERO:
        return "down"
    up = mode is Mode.UP
    return "up" if up != negative else "down"


def _round_quotient(num: int, den: int, how: str, exact_half=None) -> int:
    """Round num/den (both > 0) to an integer."""
    q, r = divmod(num, den)
    if r == 0:
        return q
    if how == "down":
        return q
    if how == "up":
        return q + 1
    twice = 2 * r
    if twice < den:
        return q
    if twice > den:
        return q + 1
    return q if q % 2 == 0 else q + 1


def _finish(m: int, e_q: int, negative: bool, cfg: RoundingConfig) -> Fraction:
    r = m * _pow2(e_q)
    if r >= _pow2(cfg.emax + 1):
        raise RoundingOverflow(f"value overflows the format (exponent above {cfg.emax})")
    return -r if negative else r


def round_dir(x: Real, cfg: RoundingConfig) -> Fraction:
    """The representable neighbour of x selected by cfg.mode, as an exact rational."""
    x = to_fraction(x)
    if x == 0:
        return Fraction(0)
    negative = x < 0
    a = -x if negative else x
    e = max(_floor_log2(a), cfg.emin)
    e_q = e - cfg.precision + 1  # exponent of one unit in the last place
    scaled = a / _pow2(e_q)
    m = _round_quotient(scaled.numerator, scaled.denominator, _magnitude_mode(cfg.mode, negative))
    return _finish(m, e_q, negative, cfg)


def round_sqrt(x: Real, cfg: RoundingConfig) -> Fraction:
    """Correctly rounded square root of a non-negative rational."""
    if not is_exact(x):
        x = to_fraction(x)
    x = Fraction(x)
    if x < 0:
        raise ValueError("square root of a negative number")
    if x == 0:
        return Fraction(0)
    e = max(_floor_log2(x) // 2, cfg.emin)
    e_q = e - cfg.precision + 1
    # sqrt(x) / 2^e_q = sqrt(y)
    y = x / _pow2(2 * e_q)
    m = isqrt(y.numerator // y.denominator)
    exact = Fraction(m * m) == y
    how = _magnitude_mode(cfg.mode, False)
    if not exact:
        if how == "up":
            m += 1
        elif how == "nearest":
            half = Fraction(2 * m + 1, 2)
            if y > half * half or (y == half * half and m % 2 == 1):
                m += 1
    return _finish(m, e_q, False, cfg)


def is_representable(x: Real, cfg: RoundingConfig) -> bool:
    x = to_fraction(x)
    try:
        return round_dir(x, cfg) == x
    except RoundingOverflow:
        return False
