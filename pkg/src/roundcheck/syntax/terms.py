"""Shared term AST for NumFuzz and Bean.

Every node carries an optional source position ``span`` = (line, column) that
is ignored by equality, so parse(pretty(t)) == t compares structure only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..grades import Grade
from .types import Type

Span = tuple[int, int]


def _span():
    return field(default=None, compare=False, repr=False, kw_only=True)


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str
    span: Span | None = _span()


@dataclass(frozen=True)
class DVar(Term):
    """Bean variable bound in the discrete context."""

    name: str
    span: Span | None = _span()


@dataclass(frozen=True)
class UnitVal(Term):
    span: Span | None = _span()


@dataclass(frozen=True)
class Const(Term):
    value: Fraction
    span: Span | None = _span()


@dataclass(frozen=True)
class Pair(Term):
    """Tensor pair (e, f)."""

    left: Term
    right: Term
    span: Span | None = _span()


@dataclass(frozen=True)
class WithPair(Term):
    """Additive pair ⟨e, f⟩ (NumFuzz only)."""

    left: Term
    right: Term
    span: Span | None = _span()


@dataclass(frozen=True)
class Inl(Term):
    body: Term
    span: Span | None = _span()


@dataclass(frozen=True)
class Inr(Term):
    body: Term
    span: Span | None = _span()


@dataclass(frozen=True)
class Lam(Term):
    param: str
    ptype: Type
    body: Term
    span: Span | None = _span()


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term
    span: Span | None = _span()


@dataclass(frozen=True)
class Proj(Term):
    index: int
    body: Term
    span: Span | None = _span()


@dataclass(frozen=True)
class Let(Term):
    """Pure let: ``x = e; f`` in NumFuzz, ``let x = e in f`` in Bean."""

    name: str
    bound: Term
    body: Term
    span: Span | None = _span()


@dataclass(frozen=True)
class LetPair(Term):
    left: str
    right: str
    bound: Term
    body: Term
    span: Span | None = _span()


@dataclass(frozen=True)
class LetBang(Term):
    name: str
    bound: Term
    body: Term
    span: Span | None = _span()


@dataclass(frozen=True)
class LetMonad(Term):
    name: str
    bound: Term
    body: Term
    span: Span | None = _span()


@dataclass(frozen=True)
class Ret(Term):
    body: Term
    span: Span | None = _span()


@dataclass(frozen=True)
class Rnd(Term):
    body: Term
    span: Span | None = _span()


@dataclass(frozen=True)
class Case(Term):
    scrut: Term
    left_name: str
    left: Term
    right_name: str
    right: Term
    span: Span | None = _span()


@dataclass(frozen=True)
class Op(Term):
    name: str
    args: tuple[Term, ...]
    span: Span | None = _span()


@dataclass(frozen=True)
class Box(Term):
    """Annotated box [v{s}]."""

    body: Term
    grade: Grade
    span: Span | None = _span()


@dataclass(frozen=True)
class Disc(Term):
    """Bean !e: turn a num into a dnum."""

    body: Term
    span: Span | None = _span()


@dataclass(frozen=True)
class DLet(Term):
    name: str
    bound: Term
    body: Term
    span: Span | None = _span()


@dataclass(frozen=True)
class DLetPair(Term):
    left: str
    right: str
    bound: Term
    body: Term
    span: Span | None = _span()


@dataclass(frozen=True)
class Param:
    name: str
    type: Type
    discrete: bool = False


@dataclass(frozen=True)
class Decl:
    name: str
    params: tuple[Param, ...]
    body: Term
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Signature:
    """``NAME : TYPE`` line.  Checks a declaration, or assumes an external one."""

    name: str
    type: Type
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Program:
    language: str
    decls: tuple[Decl, ...]
    signatures: tuple[Signature, ...] = ()

    def decl(self, name: str) -> Decl:
        for d in self.decls:
            if d.name == name:
                return d
        raise KeyError(name)

    @property
    def names(self) -> list[str]:
        return [d.name for d in self.decls]


def children(t: Term) -> list[Term]:
    """Immediate sub-terms, in source order."""
    out = []
    for name in t.__dataclass_fields__:
        if name == "span":
            continue
        v = getattr(t, name)
        if isinstance(v, Term):
            out.append(v)
        elif isinstance(v, tuple):
            out.extend(x for x in v if isinstance(x, Term))
    return out


def size(t: Term) -> int:
    total, stack = 0, [t]
    while stack:
        node = stack.pop()
        total += 1
        stack.extend(children(node))
    return total


def free_vars(t: Term) -> set[str]:
    """Free variable names (both Var and DVar)."""
    if isinstance(t, (Var, DVar)):
        return {t.name}
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.param}
    if isinstance(t, (Let, LetBang, LetMonad, DLet)):
        return free_vars(t.bound) | (free_vars(t.body) - {t.name})
    if isinstance(t, (LetPair, DLetPair)):
        return free_vars(t.bound) | (free_vars(t.body) - {t.left, t.right})
    if isinstance(t, Case):
        return (
            free_vars(t.scrut)
            | (free_vars(t.left) - {t.left_name})
            | (free_vars(t.right) - {t.right_name})
        )
    out: set[str] = set()
    for c in children(t):
        out |= free_vars(c)
    return out
