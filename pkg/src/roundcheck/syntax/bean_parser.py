"""Parser for Bean surface programs (.bean).

    Name (x: num2, y: num2) {z: dnum} := body

Parenthesised groups are linear parameters, braced groups are discrete.  A bare
name is a linear ``num`` and a bare tuple pattern such as ``(b0, b1)`` is a
linear tensor of nums that is destructured on entry, so listings written
without annotations still parse.  Type shorthand: ``num3`` is num ⊗ num ⊗ num,
``num2x2`` is a pair of num2 rows, ``dnumN`` likewise.

Expressions: ``let p = e in f`` (p may be a nested tuple pattern),
``dlet p = e in f``, ``case e of inl x => f | inr y => g``, ``!e``, ``inl e``,
``inr e``, primitives ``add sub mul div dmul`` and calls to earlier
declarations.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

from .lexer import ParseError, Token, TokenStream, tokenize
from .terms import (
    App, Case, Const, Decl, Disc, DLet, DLetPair, DVar, Inl, Inr, Let, LetPair, Op,
    Pair, Param, Program, Term, UnitVal, Var,
)
from .types import DNUM, ERR, NUM, UNIT, Sum, Tensor, Type, matrix, vector
from .nfz_parser import parse_number

BEAN_PRIMITIVES = ("add", "sub", "mul", "div", "dmul")
_KEYWORDS = {"let", "dlet", "in", "case", "of", "inl", "inr"}
_NFZ_ONLY = {"rnd", "ret", "fun", "function", "⟨", "⟩", "[", "&"}
_TENSORS = ("⊗", "otimes", "*")
_SHORTHAND = re.compile(r"^(d?num)(\d+)(?:x(\d+))?$")


def parse_bean_type(ts: TokenStream) -> Type:
    left = _bean_prod(ts)
    if ts.accept("+"):
        return Sum(left, parse_bean_type(ts))
    return left


def _bean_prod(ts):
    left = _bean_atom(ts)
    if ts.accept(*_TENSORS):
        return Tensor(left, _bean_prod(ts))
    return left


def _bean_atom(ts):
    tok = ts.peek()
    if ts.accept("("):
        t = parse_bean_type(ts)
        ts.expect(")")
        return t
    if tok.kind == "ident":
        word = tok.text
        simple = {"num": NUM, "R": NUM, "ℝ": NUM, "dnum": DNUM, "unit": UNIT, "err": ERR}
        if word in simple:
            ts.next()
            return simple[word]
        m = _SHORTHAND.match(word)
        if m:
            ts.next()
            elem = DNUM if m.group(1) == "dnum" else NUM
            n = int(m.group(2))
            if n < 1:
                raise ParseError("vector types need at least one component", tok.line, tok.col)
            if m.group(3):
                return matrix(n, int(m.group(3)), elem)
            return vector(n, elem)
    raise ts.error(f"expected a Bean type, found {tok.text or 'end of input'!r}")


@dataclass
class _Pattern:
    """Nested tuple pattern; leaves are name tokens."""

    name: Token | None = None
    left: "_Pattern | None" = None
    right: "_Pattern | None" = None

    def shape(self) -> Type:
        if self.name is not None:
            return NUM
        return Tensor(self.left.shape(), self.right.shape())


class _BeanParser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.globals: dict[str, int] = {}
        self.scope: dict[str, bool] = {}  # name -> discrete?
        self.fresh = itertools.count(1)

    # -- program -----------------------------------------------------------

    def program(self) -> Program:
        toks = self.tokens
        if toks[0].kind == "eof":
            raise ParseError("empty program", 1, 1)
        marks = [i for i, t in enumerate(toks) if t.kind == "sym" and t.text == ":="]
        if not marks:
            t = toks[0]
            raise ParseError("expected a declaration 'Name params := body'", t.line, t.col)
        starts = []
        for m in marks:
            line = toks[m].line
            s = m
            while s > 0 and toks[s - 1].line == line:
                s -= 1
            starts.append(s)
        if starts[0] != 0:
            t = toks[0]
            raise ParseError(f"unexpected {t.text!r} before the first declaration", t.line, t.col)
        eof = toks[-1]
        decls = []
        for k, (s, m) in enumerate(zip(starts, marks)):
            end = starts[k + 1] if k + 1 < len(starts) else len(toks) - 1
            if k > 0 and starts[k] <= marks[k - 1]:
                t = toks[m]
                raise ParseError("declaration header must start on its own line", t.line, t.col)
            header = toks[s:m] + [Token("eof", "", toks[m].line, toks[m].col)]
            body = toks[m + 1:end] + [Token("eof", "", eof.line, eof.col)]
            decls.append(self.decl(header, body))
        return Program("bean", tuple(decls))

    def decl(self, header: list[Token], body_tokens: list[Token]) -> Decl:
        ts = TokenStream(header)
        name_tok = ts.expect_ident("declaration name")
        if name_tok.text in self.globals:
            raise ParseError(f"duplicate declaration {name_tok.text!r}", *name_tok.pos)
        params: list[Param] = []
        unpack: list[tuple[str, _Pattern]] = []
        self.scope = {}
        while ts.peek().kind != "eof":
            tok = ts.peek()
            if tok.kind == "ident":
                ts.next()
                params.append(Param(self.bind(tok, False), NUM))
            elif ts.at("{"):
                ts.next()
                for n, t in self.param_group(ts, "}"):
                    params.append(Param(self.bind(n, True), t, discrete=True))
            elif ts.at("(") and ts.peek(1).kind == "ident" and ts.peek(2).text == ":":
                ts.next()
                for n, t in self.param_group(ts, ")"):
                    params.append(Param(self.bind(n, False), t))
            elif ts.at("("):
                pat = self.pattern(ts)
                synth = self.fresh_name()
                self.scope[synth] = False
                params.append(Param(synth, pat.shape()))
                unpack.append((synth, pat))
            else:
                raise ts.error(f"unexpected {tok.text!r} in parameter list")
        bts = TokenStream(body_tokens)
        if bts.peek().kind == "eof":
            raise ParseError(f"declaration {name_tok.text!r} has an empty body", *name_tok.pos)
        self.ts = bts
        body = self.with_unpacked(unpack, self.expr)
        if bts.peek().kind != "eof":
            raise bts.error(f"unexpected {bts.peek().text!r} after declaration body")
        self.globals[name_tok.text] = len(params)
        return Decl(name_tok.text, tuple(params), body, span=name_tok.pos)

    def param_group(self, ts: TokenStream, close: str):
        out = []
        while True:
            n = ts.expect_ident("parameter name")
            ts.expect(":")
            out.append((n, parse_bean_type(ts)))
            if not ts.accept(","):
                break
        ts.expect(close)
        return out

    def with_unpacked(self, unpack, build):
        if not unpack:
            return build()
        synth, pat = unpack[0]
        return self.destructure(pat, Var(synth, span=pat_pos(pat)), False,
                                lambda: self.with_unpacked(unpack[1:], build))

    # -- scope -------------------------------------------------------------

    def fresh_name(self) -> str:
        while True:
            name = f"_arg{next(self.fresh)}"
            if name not in self.scope:
                return name

    def bind(self, tok: Token, discrete: bool) -> str:
        name = tok.text
        if name in _KEYWORDS or name in BEAN_PRIMITIVES:
            raise ParseError(f"{name!r} is reserved and cannot be bound", tok.line, tok.col)
        if name in self.scope:
            raise ParseError(f"variable {name!r} shadows an enclosing binding", tok.line, tok.col)
        self.scope[name] = discrete
        return name

    def scoped(self, toks: list[tuple[Token, bool]], build):
        names = [self.bind(t, d) for t, d in toks]
        try:
            return build()
        finally:
            for n in names:
                del self.scope[n]

    # -- patterns ----------------------------------------------------------

    def pattern(self, ts: TokenStream) -> _Pattern:
        if ts.accept("("):
            items = [self.pattern(ts)]
            ts.expect(",")
            items.append(self.pattern(ts))
            while ts.accept(","):
                items.append(self.pattern(ts))
            ts.expect(")")
            # (p1, p2, ..., pk) nests to the right, like vector types
            out = items[-1]
            for item in reversed(items[:-1]):
                out = _Pattern(left=item, right=out)
            return out
        return _Pattern(name=ts.expect_ident())

    def destructure(self, pat: _Pattern, bound: Term, discrete: bool, build) -> Term:
        """Bind ``pat`` to ``bound`` with binary lets, then build the body."""
        if pat.name is not None:
            ctor = DLet if discrete else Let
            return self.scoped([(pat.name, discrete)],
                               lambda: ctor(pat.name.text, bound, build(), span=pat.name.pos))
        parts = []
        for side in (pat.left, pat.right):
            if side.name is not None:
                parts.append((side.name, None))
            else:
                tok = pat_first(side)
                synth = Token("ident", self.fresh_name(), tok.line, tok.col)
                parts.append((synth, side))
        ctor = DLetPair if discrete else LetPair
        ref = DVar if discrete else Var

        def inner():
            nested = [(tok, sub) for tok, sub in parts if sub is not None]

            def go(i):
                if i == len(nested):
                    return build()
                tok, sub = nested[i]
                return self.destructure(sub, ref(tok.text, span=tok.pos), discrete, lambda: go(i + 1))

            return go(0)

        (lt, _), (rt, _) = parts
        return self.scoped(
            [(lt, discrete), (rt, discrete)],
            lambda: ctor(lt.text, rt.text, bound, inner(), span=lt.pos),
        )

    # -- expressions -------------------------------------------------------

    def expr(self) -> Term:
        ts = self.ts
        tok = ts.peek()
        if tok.text in _NFZ_ONLY and tok.kind in ("ident", "sym"):
            raise ts.error(f"NumFuzz-only construct {tok.text!r} is not allowed in Bean")
        if ts.at("let", "dlet"):
            discrete = ts.next().text == "dlet"
            pat = self.pattern(ts)
            ts.expect("=")
            bound = self.expr()
            ts.expect("in")
            return self.destructure(pat, bound, discrete, self.expr)
        if ts.at("case"):
            ts.next()
            scrut = self.expr()
            ts.expect("of")
            ts.expect("inl")
            lname = self.binder()
            ts.expect("=>")
            left = self.scoped([(lname, False)], self.expr)
            ts.expect("|")
            ts.expect("inr")
            rname = self.binder()
            ts.expect("=>")
            right = self.scoped([(rname, False)], self.expr)
            return Case(scrut, lname.text, left, rname.text, right, span=tok.pos)
        return self.app()

    def binder(self) -> Token:
        ts = self.ts
        if ts.accept("("):
            t = ts.expect_ident()
            ts.expect(")")
            return t
        return ts.expect_ident()

    def app(self) -> Term:
        ts = self.ts
        tok = ts.peek()
        if tok.kind == "ident" and tok.text in BEAN_PRIMITIVES:
            ts.next()
            a = self.atom()
            b = self.atom()
            return Op(tok.text, (a, b), span=tok.pos)
        if ts.at("inl", "inr"):
            ts.next()
            body = self.atom()
            return (Inl if tok.text == "inl" else Inr)(body, span=tok.pos)
        if ts.accept("!"):
            return Disc(self.atom(), span=tok.pos)
        head = self.atom()
        if not self.starts_atom():
            return head
        if not (isinstance(head, Var) and head.name in self.globals and head.name not in self.scope):
            name = getattr(head, "name", None)
            what = f"{name!r}" if name else "expression"
            raise ParseError(f"unknown primitive or function {what}", *tok.pos)
        while self.starts_atom():
            head = App(head, self.atom(), span=tok.pos)
        return head

    def starts_atom(self) -> bool:
        tok = self.ts.peek()
        if tok.kind == "num":
            return True
        if tok.kind == "ident":
            return tok.text not in _KEYWORDS and tok.text not in BEAN_PRIMITIVES
        return tok.text == "("

    def atom(self) -> Term:
        ts = self.ts
        tok = ts.peek()
        if tok.text in _NFZ_ONLY and tok.kind in ("ident", "sym"):
            raise ts.error(f"NumFuzz-only construct {tok.text!r} is not allowed in Bean")
        if tok.kind == "num":
            ts.next()
            return Const(parse_number(tok, ts), span=tok.pos)
        if tok.kind == "ident" and tok.text not in _KEYWORDS and tok.text not in BEAN_PRIMITIVES:
            ts.next()
            if self.scope.get(tok.text, False):
                return DVar(tok.text, span=tok.pos)
            return Var(tok.text, span=tok.pos)
        if ts.accept("("):
            if ts.accept(")"):
                return UnitVal(span=tok.pos)
            first = self.expr()
            if ts.accept(","):
                items = [first, self.expr()]
                while ts.accept(","):
                    items.append(self.expr())
                ts.expect(")")
                out = items[-1]
                for item in reversed(items[:-1]):
                    out = Pair(item, out, span=tok.pos)
                return out
            ts.expect(")")
            return first
        raise ts.error(f"expected an expression, found {tok.text or 'end of input'!r}")


def pat_first(p: _Pattern) -> Token:
    while p.name is None:
        p = p.left
    return p.name


def pat_pos(p: _Pattern):
    return pat_first(p).pos


def parse_bean(text: str) -> Program:
    from .._deep import deep

    return deep(lambda: _BeanParser(text).program())()


def parse_bean_type_text(text: str) -> Type:
    ts = TokenStream(tokenize(text))
    t = parse_bean_type(ts)
    if ts.peek().kind != "eof":
        raise ts.error(f"trailing input {ts.peek().text!r} after type")
    return t
