"""Pretty-printers for both surface languages.

Output parses back to the same tree: ``parse(pretty(t)) == t``.  Grades are
written as multiples of u when the multiple is short, otherwise as exact
fractions, so the round trip needs the same RoundingConfig on both sides.
"""

from __future__ import annotations

from fractions import Fraction

from ..grades import Grade, NUMFUZZ_CONFIG, RoundingConfig, multiple_of
from .terms import (
    App, Box, Case, Const, Decl, Disc, DLet, DLetPair, DVar, Inl, Inr, Lam, Let, LetBang,
    LetMonad, LetPair, Op, Pair, Program, Proj, Ret, Rnd, Term, UnitVal, Var, WithPair,
)
from .types import (
    Bang, DNum, Err, Hole, Lolli, Monad, Num, Sum, Tensor, Type, Unit, With, leaf_count,
    matrix, vector, NUM, DNUM,
)


def pretty_grade(g: Grade, config: RoundingConfig = NUMFUZZ_CONFIG) -> str:
    if g.infinite:
        return "inf"
    mult = multiple_of(g, config.u, "u")
    if mult is not None:
        return mult
    return str(g.value)


def pretty_number(x: Fraction) -> str:
    """Finite decimal when one exists, else n/d."""
    x = Fraction(x)
    d = x.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{x.numerator}/{x.denominator}"
    if x.denominator == 1:
        return str(x.numerator)
    places = max(twos, fives)
    scaled = x * 10**places
    digits = str(abs(scaled.numerator)).rjust(places + 1, "0")
    sign = "-" if x < 0 else ""
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


# ---------------------------------------------------------------- types

_ARROW, _SUM, _PROD, _PREFIX = range(4)


def pretty_type(t: Type, config: RoundingConfig = NUMFUZZ_CONFIG) -> str:
    return _nfz_type(t, _ARROW, config)


def _wrap(text: str, needed: bool) -> str:
    return f"({text})" if needed else text


def _nfz_type(t: Type, level: int, config) -> str:
    if isinstance(t, Unit):
        return "unit"
    if isinstance(t, Num):
        return "num"
    if isinstance(t, DNum):
        return "dnum"
    if isinstance(t, Err):
        return "err"
    if isinstance(t, Hole):
        return "?"
    if isinstance(t, Lolli):
        text = f"{_nfz_type(t.dom, _SUM, config)} ⊸ {_nfz_type(t.cod, _ARROW, config)}"
        return _wrap(text, level > _ARROW)
    if isinstance(t, Sum):
        text = f"{_nfz_type(t.left, _PROD, config)} + {_nfz_type(t.right, _SUM, config)}"
        return _wrap(text, level > _SUM)
    if isinstance(t, (Tensor, With)):
        op = "⊗" if isinstance(t, Tensor) else "&"
        text = f"{_nfz_type(t.left, _PREFIX, config)} {op} {_nfz_type(t.right, _PROD, config)}"
        return _wrap(text, level > _PROD)
    if isinstance(t, Monad):
        return f"M[{pretty_grade(t.grade, config)}]{_nfz_type(t.inner, _PREFIX, config)}"
    if isinstance(t, Bang):
        return f"![{pretty_grade(t.grade, config)}]{_nfz_type(t.inner, _PREFIX, config)}"
    raise TypeError(f"not a type: {t!r}")


def _shorthand(t: Type) -> str | None:
    for elem, word in ((NUM, "num"), (DNUM, "dnum")):
        n = leaf_count(t)
        if n >= 2 and t == vector(n, elem):
            return f"{word}{n}"
        if isinstance(t, Tensor) and isinstance(t.left, Tensor):
            cols = leaf_count(t.left)
            if n % cols == 0 and t == matrix(n // cols, cols, elem):
                return f"{word}{n // cols}x{cols}"
    return None


def pretty_bean_type(t: Type) -> str:
    return _bean_type(t, _SUM)


def _bean_type(t: Type, level: int) -> str:
    short = _shorthand(t)
    if short is not None:
        return short
    if isinstance(t, Sum):
        return _wrap(f"{_bean_type(t.left, _PROD)} + {_bean_type(t.right, _SUM)}", level > _SUM)
    if isinstance(t, Tensor):
        return _wrap(f"{_bean_type(t.left, _PREFIX)} ⊗ {_bean_type(t.right, _PROD)}", level > _PROD)
    return _nfz_type(t, level, NUMFUZZ_CONFIG)


# ---------------------------------------------------------------- NumFuzz terms

_LETS = (Let, LetPair, LetBang, LetMonad, DLet, DLetPair)


def _is_atom(t: Term) -> bool:
    return isinstance(t, (Var, DVar, UnitVal, Const, Pair, WithPair, Box))


def pretty_term(t: Term, config: RoundingConfig = NUMFUZZ_CONFIG) -> str:
    return _NfzPrinter(config).expr(t)


class _NfzPrinter:
    def __init__(self, config: RoundingConfig):
        self.config = config

    def expr(self, t: Term) -> str:
        if isinstance(t, Let):
            return f"{t.name} = {self.bound(t.bound)}; {self.expr(t.body)}"
        if isinstance(t, LetMonad):
            return f"let {t.name} = {self.bound(t.bound)}; {self.expr(t.body)}"
        if isinstance(t, LetBang):
            return f"let [{t.name}] = {self.bound(t.bound)}; {self.expr(t.body)}"
        if isinstance(t, LetPair):
            return f"let ({t.left}, {t.right}) = {self.bound(t.bound)}; {self.expr(t.body)}"
        if isinstance(t, Case):
            return (
                f"case {self.bound(t.scrut)} of {{inl {t.left_name} => {self.expr(t.left)}"
                f" | inr {t.right_name} => {self.expr(t.right)}}}"
            )
        return self.app(t)

    def bound(self, t: Term) -> str:
        text = self.expr(t)
        return f"({text})" if isinstance(t, _LETS) else text

    def app(self, t: Term) -> str:
        if isinstance(t, Ret):
            return f"ret {self.atom(t.body)}"
        if isinstance(t, Rnd):
            return f"rnd {self.atom(t.body)}"
        if isinstance(t, Inl):
            return f"inl {self.atom(t.body)}"
        if isinstance(t, Inr):
            return f"inr {self.atom(t.body)}"
        if isinstance(t, Proj):
            return f"pi{t.index} {self.atom(t.body)}"
        if isinstance(t, Op):
            return " ".join([t.name] + [self.atom(a) for a in t.args])
        if isinstance(t, App):
            head = self.app(t.fn) if isinstance(t.fn, App) else self.atom(t.fn)
            return f"{head} {self.atom(t.arg)}"
        if isinstance(t, Lam):
            return f"fun ({t.param}: {pretty_type(t.ptype, self.config)}) {{ {self.expr(t.body)} }}"
        return self.atom(t)

    def atom(self, t: Term) -> str:
        if isinstance(t, (Var, DVar)):
            return t.name
        if isinstance(t, UnitVal):
            return "()"
        if isinstance(t, Const):
            return pretty_number(t.value)
        if isinstance(t, Pair):
            return f"({self.expr(t.left)}, {self.expr(t.right)})"
        if isinstance(t, WithPair):
            return f"⟨{self.expr(t.left)}, {self.expr(t.right)}⟩"
        if isinstance(t, Box):
            return f"[{self.expr(t.body)}{{{pretty_grade(t.grade, self.config)}}}]"
        if isinstance(t, Lam):
            return self.app(t)
        return f"({self.expr(t)})"


# ---------------------------------------------------------------- Bean terms


def _ends_open(t: Term) -> bool:
    """Whether t ends in a case arm that would swallow a following '|'."""
    while isinstance(t, _LETS):
        t = t.body
    return isinstance(t, Case)


def pretty_bean_term(t: Term) -> str:
    return _bean_expr(t)


def _bean_expr(t: Term) -> str:
    if isinstance(t, (Let, DLet)):
        kw = "let" if isinstance(t, Let) else "dlet"
        return f"{kw} {t.name} = {_bean_bound(t.bound)} in {_bean_expr(t.body)}"
    if isinstance(t, (LetPair, DLetPair)):
        kw = "let" if isinstance(t, LetPair) else "dlet"
        return f"{kw} ({t.left}, {t.right}) = {_bean_bound(t.bound)} in {_bean_expr(t.body)}"
    if isinstance(t, Case):
        left = _bean_expr(t.left)
        if _ends_open(t.left):
            left = f"({left})"
        return (
            f"case {_bean_bound(t.scrut)} of inl {t.left_name} => {left}"
            f" | inr {t.right_name} => {_bean_expr(t.right)}"
        )
    if isinstance(t, Op):
        return " ".join([t.name] + [_bean_atom(a) for a in t.args])
    if isinstance(t, Inl):
        return f"inl {_bean_atom(t.body)}"
    if isinstance(t, Inr):
        return f"inr {_bean_atom(t.body)}"
    if isinstance(t, Disc):
        return f"!{_bean_atom(t.body)}"
    if isinstance(t, App):
        head = _bean_expr(t.fn) if isinstance(t.fn, App) else _bean_atom(t.fn)
        return f"{head} {_bean_atom(t.arg)}"
    return _bean_atom(t)


def _bean_bound(t: Term) -> str:
    text = _bean_expr(t)
    return f"({text})" if isinstance(t, _LETS + (Case,)) else text


def _bean_atom(t: Term) -> str:
    if isinstance(t, (Var, DVar)):
        return t.name
    if isinstance(t, UnitVal):
        return "()"
    if isinstance(t, Const):
        return pretty_number(t.value)
    if isinstance(t, Pair):
        return f"({_bean_expr(t.left)}, {_bean_expr(t.right)})"
    return f"({_bean_expr(t)})"


# ---------------------------------------------------------------- programs


def pretty_decl(d: Decl, language: str, config: RoundingConfig = NUMFUZZ_CONFIG) -> str:
    if language == "bean":
        params = " ".join(
            ("{%s: %s}" if p.discrete else "(%s: %s)") % (p.name, pretty_bean_type(p.type))
            for p in d.params
        )
        head = f"{d.name} {params}".rstrip()
        return f"{head} :=\n  {pretty_bean_term(d.body)}"
    params = ", ".join(f"{p.name}: {pretty_type(p.type, config)}" for p in d.params)
    return f"function {d.name} ({params}) {{\n  {pretty_term(d.body, config)}\n}}"


def pretty_program(p: Program, config: RoundingConfig = NUMFUZZ_CONFIG) -> str:
    parts = [f"{s.name} : {pretty_type(s.type, config)}" for s in p.signatures]
    parts += [pretty_decl(d, p.language, config) for d in p.decls]
    return "\n\n".join(parts) + "\n"


def pretty(obj, config: RoundingConfig = NUMFUZZ_CONFIG, language: str = "nfz") -> str:
    """Dispatch on types, terms, declarations and programs."""
    if isinstance(obj, Program):
        return pretty_program(obj, config)
    if isinstance(obj, Decl):
        return pretty_decl(obj, language, config)
    if isinstance(obj, Type):
        return pretty_bean_type(obj) if language == "bean" else pretty_type(obj, config)
    if isinstance(obj, Term):
        return pretty_bean_term(obj) if language == "bean" else pretty_term(obj, config)
    if isinstance(obj, Grade):
        return pretty_grade(obj, config)
    raise TypeError(f"cannot pretty-print {type(obj).__name__}")
