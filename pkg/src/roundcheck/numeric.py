"""Mixed exact/high-precision reals.

Ideal values are Fractions whenever the operation keeps them rational; square
roots of non-squares become mpmath floats at WORK_PREC bits.  Arithmetic here
accepts either and only leaves the rationals when it has to.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import Union

import mpmath

WORK_PREC = 512

Real = Union[Fraction, mpmath.mpf]


def is_exact(x) -> bool:
    return isinstance(x, (Fraction, int))


def to_mpf(x: Real) -> mpmath.mpf:
    if isinstance(x, mpmath.mpf):
        return x
    x = Fraction(x)
    with mpmath.workprec(WORK_PREC):
        return mpmath.mpf(x.numerator) / x.denominator


def to_fraction(x: Real) -> Fraction:
    """Exact value of a Fraction or a (binary) mpf."""
    if is_exact(x):
        return Fraction(x)
    if not mpmath.isfinite(x):
        raise ValueError(f"not a finite real: {x}")
    man, exp = mpmath.mpf(x).man_exp
    man = int(man)
    return Fraction(man * 2**exp) if exp >= 0 else Fraction(man, 2 ** (-exp))


def _lift(a: Real, b: Real):
    if is_exact(a) and is_exact(b):
        return Fraction(a), Fraction(b), True
    return to_mpf(a), to_mpf(b), False


def add(a: Real, b: Real) -> Real:
    x, y, exact = _lift(a, b)
    if exact:
        return x + y
    with mpmath.workprec(WORK_PREC):
        return x + y


def sub(a: Real, b: Real) -> Real:
    x, y, exact = _lift(a, b)
    if exact:
        return x - y
    with mpmath.workprec(WORK_PREC):
        return x - y


def mul(a: Real, b: Real) -> Real:
    x, y, exact = _lift(a, b)
    if exact:
        return x * y
    with mpmath.workprec(WORK_PREC):
        return x * y


def div(a: Real, b: Real) -> Real:
    if is_zero(b):
        raise ZeroDivisionError("division by zero")
    x, y, exact = _lift(a, b)
    if exact:
        return x / y
    with mpmath.workprec(WORK_PREC):
        return x / y


def is_zero(x: Real) -> bool:
    return x == 0


def sign(x: Real) -> int:
    return (x > 0) - (x < 0)


def exact_sqrt(x: Real) -> Real:
    """sqrt(x) as a Fraction when x is the square of a rational, else an mpf."""
    if is_exact(x):
        x = Fraction(x)
        if x < 0:
            raise ValueError("square root of a negative number")
        n, d = x.numerator, x.denominator
        rn, rd = isqrt(n), isqrt(d)
        if rn * rn == n and rd * rd == d:
            return Fraction(rn, rd)
    if x < 0:
        raise ValueError("square root of a negative number")
    with mpmath.workprec(WORK_PREC):
        return mpmath.sqrt(to_mpf(x))


def close(a: Real, b: Real, rel: float = 1e-30) -> bool:
    """Equal when both are exact, else within a relative tolerance."""
    if is_exact(a) and is_exact(b):
        return Fraction(a) == Fraction(b)
    if a == 0 or b == 0:
        return a == b
    with mpmath.workprec(WORK_PREC):
        x, y = to_mpf(a), to_mpf(b)
        return abs(x - y) <= rel * abs(y)


def real_str(x: Real, digits: int = 20) -> str:
    if is_exact(x):
        x = Fraction(x)
        return str(x)
    return mpmath.nstr(x, digits)
