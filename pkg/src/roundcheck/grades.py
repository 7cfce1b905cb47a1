"""Exact grades over the extended non-negative rationals, plus rounding constants.

Grades are sensitivities and error bounds.  They are never floats: every table
value we compare against is a display of an exact multiple of the unit roundoff.
"""

from __future__ import annotations

import enum
import os
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Union

Rational = Union[int, Fraction]


@dataclass(frozen=True)
class Grade:
    """A finite non-negative rational or infinity.

    ``value`` is meaningless when ``infinite`` is set; it is kept at 0 so that
    equality and hashing behave.
    """

    value: Fraction = Fraction(0)
    infinite: bool = False

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))
        if self.infinite:
            object.__setattr__(self, "value", Fraction(0))
        elif self.value < 0:
            raise ValueError(f"grades are non-negative, got {self.value}")

    @classmethod
    def of(cls, x: "Grade | Rational | str") -> "Grade":
        if isinstance(x, Grade):
            return x
        if isinstance(x, str):
            return parse_grade(x)
        return cls(Fraction(x))

    @property
    def is_finite(self) -> bool:
        return not self.infinite

    @property
    def is_zero(self) -> bool:
        return not self.infinite and self.value == 0

    def __add__(self, other: "Grade | Rational") -> "Grade":
        other = Grade.of(other)
        if self.infinite or other.infinite:
            return INF
        return Grade(self.value + other.value)

    __radd__ = __add__

    def __mul__(self, other: "Grade | Rational") -> "Grade":
        other = Grade.of(other)
        # 0 * inf = 0
        if self.is_zero or other.is_zero:
            return ZERO
        if self.infinite or other.infinite:
            return INF
        return Grade(self.value * other.value)

    __rmul__ = __mul__

    def __le__(self, other: "Grade | Rational") -> bool:
        other = Grade.of(other)
        if other.infinite:
            return True
        if self.infinite:
            return False
        return self.value <= other.value

    def __lt__(self, other: "Grade | Rational") -> bool:
        other = Grade.of(other)
        return self <= other and self != other

    def __ge__(self, other: "Grade | Rational") -> bool:
        return Grade.of(other) <= self

    def __gt__(self, other: "Grade | Rational") -> bool:
        return Grade.of(other) < self

    def divide(self, other: "Grade") -> "Grade":
        """Smallest t with t * other >= self, where it exists (used by !-elimination)."""
        other = Grade.of(other)
        if self.is_zero:
            return ZERO
        if other.is_zero:
            return INF
        if other.infinite:
            # any positive t works and none is least; 1 keeps the scaling neutral
            return ONE
        if self.infinite:
            return INF
        return Grade(self.value / other.value)

    def __str__(self) -> str:
        return "inf" if self.infinite else str(self.value)

    def __repr__(self) -> str:
        return f"Grade({self})"


ZERO = Grade(Fraction(0))
ONE = Grade(Fraction(1))
INF = Grade(infinite=True)


def grade_add(a: Grade, b: Grade) -> Grade:
    return Grade.of(a) + Grade.of(b)


def grade_mul(a: Grade, b: Grade) -> Grade:
    return Grade.of(a) * Grade.of(b)


def grade_leq(a: Grade, b: Grade) -> bool:
    return Grade.of(a) <= Grade.of(b)


def grade_max(a: Grade, b: Grade) -> Grade:
    return b if a <= b else a


def grade_min(a: Grade, b: Grade) -> Grade:
    return a if a <= b else b


def rp_to_rel(alpha: Grade | Rational) -> Fraction:
    """Relative-error bound alpha/(1-alpha) implied by an RP bound alpha."""
    alpha = Grade.of(alpha)
    if alpha.infinite or alpha.value >= 1:
        raise ValueError(f"rp_to_rel needs a finite bound below 1, got {alpha}")
    return alpha.value / (1 - alpha.value)


class Mode(enum.Enum):
    UP = "up"
    DOWN = "down"
    ZERO = "zero"
    NEAREST = "nearest"

    @classmethod
    def parse(cls, text: str) -> "Mode":
        aliases = {
            "up": cls.UP, "+inf": cls.UP, "toward+inf": cls.UP, "ru": cls.UP,
            "down": cls.DOWN, "-inf": cls.DOWN, "toward-inf": cls.DOWN, "rd": cls.DOWN,
            "zero": cls.ZERO, "toward0": cls.ZERO, "rz": cls.ZERO,
            "nearest": cls.NEAREST, "rne": cls.NEAREST, "nearest-even": cls.NEAREST,
        }
        try:
            return aliases[text.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown rounding mode {text!r}") from None


@dataclass(frozen=True)
class RoundingConfig:
    """Binary floating-point format and rounding mode.

    ``u`` defaults to 2^(1-p) for directed modes and 2^-p for nearest; it can be
    overridden (e.g. through ROUNDCHECK_U).  ``eps`` is always u/(1-u).
    """

    precision: int = 53
    mode: Mode = Mode.UP
    u: Fraction | None = None
    emin: int = -1022
    emax: int = 1023
    eps: Fraction = field(init=False)

    def __post_init__(self):
        if self.precision < 2:
            raise ValueError("precision must be at least 2 bits")
        if self.u is None:
            base = Fraction(1, 2 ** (self.precision - 1))
            object.__setattr__(self, "u", base / 2 if self.mode is Mode.NEAREST else base)
        else:
            object.__setattr__(self, "u", Fraction(self.u))
        if not 0 < self.u < 1:
            raise ValueError(f"unit roundoff must lie in (0,1), got {self.u}")
        object.__setattr__(self, "eps", self.u / (1 - self.u))

    @property
    def rnd_grade(self) -> Grade:
        """RP cost of one rounding on positive data.

        Rounding up only ever grows a positive value, so ln(1+d) <= u suffices.
        Every other mode can shrink it, which costs -ln(1-u) <= u/(1-u).
        """
        return Grade(self.u if self.mode is Mode.UP else self.eps)

    def with_u(self, u: Rational | str) -> "RoundingConfig":
        return replace(self, u=Fraction(u))

    def describe(self) -> dict:
        return {
            "precision": self.precision,
            "mode": self.mode.value,
            "u": str(self.u),
            "eps": str(self.eps),
        }


NUMFUZZ_CONFIG = RoundingConfig(53, Mode.UP)
BEAN_CONFIG = RoundingConfig(53, Mode.NEAREST)
# forward-from-backward comparison runs Bean at the NumFuzz unit roundoff
BEAN_FZ_CONFIG = RoundingConfig(53, Mode.UP)

ENV_U = "ROUNDCHECK_U"


def config_from_env(base: RoundingConfig) -> RoundingConfig:
    text = os.environ.get(ENV_U)
    if not text:
        return base
    try:
        u = Fraction(text.strip())
    except ValueError:
        raise ValueError(f"{ENV_U} must be a rational like 1/4503599627370496, got {text!r}") from None
    return base.with_u(u)


# ---------------------------------------------------------------- display


def sig_digits(x: Rational, digits: int = 3) -> str:
    """Decimal scientific display of an exact rational, rounded to nearest."""
    x = Fraction(x)
    if x == 0:
        return "0"
    sign = "-" if x < 0 else ""
    x = abs(x)
    exp = len(str(x.numerator)) - len(str(x.denominator))
    while Fraction(10) ** exp > x:
        exp -= 1
    while Fraction(10) ** (exp + 1) <= x:
        exp += 1
    scaled = x / Fraction(10) ** (exp - digits + 1)
    mant = round(scaled)
    if mant >= 10**digits:
        mant //= 10
        exp += 1
    text = str(mant)
    body = text[0] + ("." + text[1:] if digits > 1 else "")
    return f"{sign}{body}e{'-' if exp < 0 else '+'}{abs(exp):02d}"


def multiple_of(g: Grade, unit: Fraction, name: str = "u") -> str | None:
    """'2u', '3/2eps', ... when g is a rational multiple of unit with small terms."""
    if g.infinite:
        return None
    k = g.value / unit
    if k == 0:
        return "0"
    if k.denominator > 64 or k.numerator > 10**9:
        return None
    if k == 1:
        return name
    return f"{k}{name}"


def display(g: Grade, unit: Fraction | None = None, name: str = "u") -> str:
    if g.infinite:
        return "inf"
    decimal = sig_digits(g.value)
    if unit is not None:
        mult = multiple_of(g, unit, name)
        if mult is not None and mult != "0":
            return f"{mult} ({decimal})"
    return decimal


# ---------------------------------------------------------------- parsing

_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_GRADE_RE = re.compile(
    rf"^\s*(?:(?P<inf>inf|∞)|(?P<num>{_NUM})(?:\s*/\s*(?P<den>{_NUM}))?\s*(?P<unit>u|eps|ε)?|(?P<bare>u|eps|ε))\s*$"
)


def parse_grade(text: str, config: RoundingConfig | None = None) -> Grade:
    """Parse '2u', '3/2eps', '1.11e-16', '1/2', 'inf'.

    Units resolve against ``config`` (NumFuzz defaults when omitted).
    """
    m = _GRADE_RE.match(text)
    if not m:
        raise ValueError(f"malformed grade {text!r}")
    if m.group("inf"):
        return INF
    config = config or NUMFUZZ_CONFIG
    units = {"u": config.u, "eps": config.eps, "ε": config.eps}
    if m.group("bare"):
        return Grade(units[m.group("bare")])
    value = Fraction(m.group("num"))
    if m.group("den"):
        value /= Fraction(m.group("den"))
    if m.group("unit"):
        value *= units[m.group("unit")]
    return Grade(value)
