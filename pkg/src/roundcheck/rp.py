"""Relative precision RP(x, y) = |ln(x / y)| with an upper-bounding guard."""

from __future__ import annotations

from fractions import Fraction

import mpmath

from .grades import Grade
from .numeric import Real, is_exact, to_fraction, to_mpf

RP_PREC = 320
# relative and absolute slack added after the log so the result is an upper bound
_GUARD_REL = mpmath.mpf(2) ** -200
_GUARD_ABS = mpmath.mpf(2) ** -280

INF = mpmath.inf


def rp_distance(x: Real, y: Real) -> mpmath.mpf:
    """Upper bound on |ln(x/y)|; 0 when both are zero, inf across signs or zero."""
    if x == 0 and y == 0:
        return mpmath.mpf(0)
    if x == 0 or y == 0 or (x > 0) != (y > 0):
        return INF
    if is_exact(x) and is_exact(y):
        ratio = Fraction(x) / Fraction(y)
        if ratio == 1:
            return mpmath.mpf(0)
    with mpmath.workprec(RP_PREC):
        if is_exact(x) and is_exact(y):
            r = to_mpf(ratio)
        else:
            r = to_mpf(x) / to_mpf(y)
        d = abs(mpmath.log(r))
        return d + d * _GUARD_REL + _GUARD_ABS


def rp_leq(d: mpmath.mpf, bound: Grade | Fraction) -> bool:
    """Exact comparison of an RP value against a rational bound."""
    bound = Grade.of(bound)
    if bound.infinite:
        return True
    if d == INF:
        return False
    return to_fraction(d) <= bound.value


def rp_ratio(d: mpmath.mpf, bound: Grade | Fraction) -> float:
    bound = Grade.of(bound)
    if bound.infinite:
        return 0.0
    if d == 0:
        return 0.0
    if bound.is_zero or d == INF:
        return float("inf")
    return float(to_fraction(d) / bound.value)
