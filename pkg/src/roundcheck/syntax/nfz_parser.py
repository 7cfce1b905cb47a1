"""Parser for NumFuzz surface programs (.nfz).

Sugar accepted, as in the listings:

    x = e; f                 pure let
    let x = v; f             monadic let
    let [x] = v; f           comonadic (box) let
    let (x, y) = v; f        tensor elimination
    ⟨a, b⟩  or  <a, b>       additive pair
    (a, b)                   tensor pair
    [v{s}]                   box with sensitivity annotation
    fun (x: T) { e }         annotated lambda
    if c then e else f       case on a boolean (unit + unit)
    function F (x: T, ...) { e }
    F : T                    signature (checks F, or assumes an external F)
"""

from __future__ import annotations

from fractions import Fraction

from ..grades import Grade, RoundingConfig, NUMFUZZ_CONFIG, parse_grade
from .lexer import ParseError, Token, TokenStream, tokenize
from .terms import (
    App, Box, Case, Const, Decl, Inl, Inr, Lam, Let, LetBang, LetMonad, LetPair,
    Op, Pair, Param, Program, Proj, Ret, Rnd, Signature, Term, UnitVal, Var, WithPair,
)
from .types import (
    Bang, Lolli, Monad, NUM, Sum, Tensor, Type, UNIT, With,
)

# primitive names recognised in operator position; types live in the checker
NFZ_PRIMITIVES = ("add", "mul", "div", "sqrt", "addfp", "mulfp", "divfp", "sqrtfp", "is_pos")

_KEYWORDS = {
    "function", "fun", "let", "ret", "rnd", "case", "of", "inl", "inr",
    "if", "then", "else", "pi1", "pi2", "num", "unit", "inf",
}
_ARROWS = ("⊸", "mapsto", "-o", "->", "→")
_TENSORS = ("⊗", "otimes", "*")
_WITHS = ("&", "with")


def parse_grade_tokens(ts: TokenStream, config: RoundingConfig) -> Grade:
    """grade := inf | ∞ | [NUM [/ NUM]] [u | eps | ε]"""
    start = ts.peek()
    if ts.accept("inf", "∞"):
        return parse_grade("inf")
    text = ""
    if ts.peek().kind == "num":
        text += ts.next().text
        if ts.accept("/"):
            tok = ts.peek()
            if tok.kind != "num":
                raise ts.error("expected a number after '/' in grade")
            text += "/" + ts.next().text
    if ts.at("u", "eps", "ε"):
        text += ts.next().text
    if not text:
        raise ts.error("expected a grade", start)
    try:
        return parse_grade(text, config)
    except ValueError as exc:
        raise ParseError(str(exc), start.line, start.col) from None


def parse_nfz_type(ts: TokenStream, config: RoundingConfig) -> Type:
    left = _sum_type(ts, config)
    if ts.accept(*_ARROWS):
        return Lolli(left, parse_nfz_type(ts, config))
    return left


def _sum_type(ts, config):
    left = _prod_type(ts, config)
    if ts.accept("+"):
        return Sum(left, _sum_type(ts, config))
    return left


def _prod_type(ts, config):
    left = _prefix_type(ts, config)
    if ts.accept(*_TENSORS):
        return Tensor(left, _prod_type(ts, config))
    if ts.accept(*_WITHS):
        return With(left, _prod_type(ts, config))
    return left


def _prefix_type(ts, config):
    if ts.at("M") and ts.peek(1).text == "[":
        ts.next()
        ts.expect("[")
        g = parse_grade_tokens(ts, config)
        ts.expect("]")
        return Monad(g, _prefix_type(ts, config))
    if ts.accept("!"):
        ts.expect("[")
        g = parse_grade_tokens(ts, config)
        ts.expect("]")
        return Bang(g, _prefix_type(ts, config))
    if ts.accept("num", "f64", "R", "ℝ"):
        return NUM
    if ts.accept("unit"):
        return UNIT
    if ts.accept("bool"):
        return Sum(UNIT, UNIT)
    if ts.accept("("):
        t = parse_nfz_type(ts, config)
        ts.expect(")")
        return t
    tok = ts.peek()
    raise ts.error(f"expected a type, found {tok.text or 'end of input'!r}")


def parse_number(tok: Token, ts: TokenStream | None = None) -> Fraction:
    """Exact value of a literal; ``n/d`` is accepted when ``ts`` is given."""
    value = Fraction(tok.text)
    if ts is not None and ts.at("/") and ts.peek(1).kind == "num":
        ts.next()
        den = Fraction(ts.next().text)
        if den == 0:
            raise ParseError("zero denominator in literal", tok.line, tok.col)
        value /= den
    return value


class _NfzParser:
    def __init__(self, text: str, config: RoundingConfig):
        self.ts = TokenStream(tokenize(text))
        self.config = config
        self.globals: set[str] = set()
        self.scope: list[str] = []

    # -- scope -------------------------------------------------------------

    def bind(self, tok: Token) -> str:
        name = tok.text
        if name == "_":
            return name
        if name in _KEYWORDS or name in NFZ_PRIMITIVES:
            raise ParseError(f"{name!r} is reserved and cannot be bound", tok.line, tok.col)
        if name in self.scope:
            raise ParseError(f"variable {name!r} shadows an enclosing binding", tok.line, tok.col)
        self.scope.append(name)
        return name

    def unbind(self, *names: str):
        for n in reversed(names):
            if n != "_":
                self.scope.remove(n)

    # -- program -----------------------------------------------------------

    def program(self) -> Program:
        ts = self.ts
        if ts.peek().kind == "eof":
            raise ParseError("empty program", 1, 1)
        decls, sigs = [], []
        seen: set[str] = set()
        while ts.peek().kind != "eof":
            if ts.at("function"):
                d = self.function()
                if d.name in seen:
                    raise ParseError(f"duplicate declaration {d.name!r}", *d.span)
                seen.add(d.name)
                decls.append(d)
            elif ts.peek().kind == "ident" and ts.peek(1).text == ":":
                name_tok = ts.next()
                ts.expect(":")
                t = parse_nfz_type(ts, self.config)
                ts.accept(";")
                sigs.append(Signature(name_tok.text, t, span=name_tok.pos))
                self.globals.add(name_tok.text)
            else:
                tok = ts.peek()
                raise ts.error(f"expected 'function' or a signature, found {tok.text!r}")
        return Program("nfz", tuple(decls), tuple(sigs))

    def function(self) -> Decl:
        ts = self.ts
        ts.expect("function")
        name_tok = ts.expect_ident("function name")
        params = []
        ts.expect("(")
        if not ts.at(")"):
            while True:
                ptok = ts.expect_ident("parameter name")
                ts.expect(":")
                ptype = parse_nfz_type(ts, self.config)
                params.append(Param(self.bind(ptok), ptype))
                if not ts.accept(","):
                    break
        ts.expect(")")
        ts.expect("{")
        body = self.expr()
        ts.expect("}")
        self.unbind(*(p.name for p in params))
        self.globals.add(name_tok.text)
        return Decl(name_tok.text, tuple(params), body, span=name_tok.pos)

    # -- expressions -------------------------------------------------------

    def expr(self) -> Term:
        ts = self.ts
        tok = ts.peek()
        if ts.at("let"):
            ts.next()
            if ts.accept("["):
                name = ts.expect_ident()
                ts.expect("]")
                ts.expect("=")
                bound = self.expr()
                ts.expect(";")
                return self.with_bound([name], lambda: LetBang(name.text, bound, self.expr(), span=tok.pos))
            if ts.accept("("):
                left = ts.expect_ident()
                ts.expect(",")
                right = ts.expect_ident()
                ts.expect(")")
                ts.expect("=")
                bound = self.expr()
                ts.expect(";")
                return self.with_bound([left, right], lambda: LetPair(left.text, right.text, bound, self.expr(), span=tok.pos))
            name = ts.expect_ident()
            ts.expect("=")
            bound = self.expr()
            ts.expect(";")
            return self.with_bound([name], lambda: LetMonad(name.text, bound, self.expr(), span=tok.pos))
        if tok.kind == "ident" and ts.peek(1).text == "=" and tok.text not in _KEYWORDS:
            ts.next()
            ts.next()
            name = tok
            bound = self.expr()
            ts.expect(";")
            return self.with_bound([name], lambda: Let(name.text, bound, self.expr(), span=tok.pos))
        if ts.at("case"):
            return self.case()
        if ts.at("if"):
            ts.next()
            cond = self.expr()
            ts.expect("then")
            yes = self.expr()
            ts.expect("else")
            no = self.expr()
            return Case(cond, "_", yes, "_", no, span=tok.pos)
        return self.app()

    def with_bound(self, toks: list[Token], build):
        names = [self.bind(t) for t in toks]
        try:
            return build()
        finally:
            self.unbind(*names)

    def case(self) -> Term:
        ts = self.ts
        tok = ts.expect("case")
        scrut = self.expr()
        ts.expect("of")
        braced = bool(ts.accept("{"))
        ts.expect("inl")
        lname = self.binder()
        ts.expect("=>")
        left = self.with_bound([lname], self.expr)
        ts.expect("|")
        ts.expect("inr")
        rname = self.binder()
        ts.expect("=>")
        right = self.with_bound([rname], self.expr)
        if braced:
            ts.expect("}")
        return Case(scrut, lname.text, left, rname.text, right, span=tok.pos)

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
        if tok.kind == "ident":
            word = tok.text
            if word in ("ret", "rnd", "inl", "inr", "pi1", "pi2"):
                ts.next()
                arg = self.atom()
                ctor = {"ret": Ret, "rnd": Rnd, "inl": Inl, "inr": Inr}.get(word)
                if ctor is not None:
                    return ctor(arg, span=tok.pos)
                return Proj(1 if word == "pi1" else 2, arg, span=tok.pos)
            if word in NFZ_PRIMITIVES and word not in self.scope:
                ts.next()
                return Op(word, (self.atom(),), span=tok.pos)
        head = self.atom()
        while self.starts_atom():
            arg = self.atom()
            if isinstance(head, Var) and head.name not in self.scope and head.name not in self.globals:
                raise ParseError(f"unknown primitive or function {head.name!r}", *head.span)
            head = App(head, arg, span=tok.pos)
        return head

    def starts_atom(self) -> bool:
        tok = self.ts.peek()
        if tok.kind == "num":
            return True
        if tok.kind == "ident":
            return tok.text not in _KEYWORDS or tok.text == "fun"
        return tok.text in ("(", "⟨", "<", "[")

    def atom(self) -> Term:
        ts = self.ts
        tok = ts.peek()
        if tok.kind == "num":
            ts.next()
            return Const(parse_number(tok, ts), span=tok.pos)
        if tok.kind == "ident":
            if tok.text == "fun":
                return self.lam()
            if tok.text in _KEYWORDS:
                raise ts.error(f"unexpected keyword {tok.text!r}")
            ts.next()
            return Var(tok.text, span=tok.pos)
        if ts.accept("("):
            if ts.accept(")"):
                return UnitVal(span=tok.pos)
            first = self.expr()
            if ts.accept(","):
                second = self.expr()
                ts.expect(")")
                return Pair(first, second, span=tok.pos)
            ts.expect(")")
            return first
        if ts.at("⟨", "<"):
            close = "⟩" if ts.next().text == "⟨" else ">"
            first = self.expr()
            ts.expect(",")
            second = self.expr()
            ts.expect(close)
            return WithPair(first, second, span=tok.pos)
        if ts.accept("["):
            body = self.expr()
            ts.expect("{")
            g = parse_grade_tokens(ts, self.config)
            ts.expect("}")
            ts.expect("]")
            return Box(body, g, span=tok.pos)
        raise ts.error(f"expected an expression, found {tok.text or 'end of input'!r}")

    def lam(self) -> Term:
        ts = self.ts
        tok = ts.expect("fun")
        ts.expect("(")
        ptok = ts.expect_ident("parameter name")
        ts.expect(":")
        ptype = parse_nfz_type(ts, self.config)
        ts.expect(")")
        ts.expect("{")
        body = self.with_bound([ptok], self.expr)
        ts.expect("}")
        return Lam(ptok.text, ptype, body, span=tok.pos)


def parse_numfuzz(text: str, config: RoundingConfig | None = None) -> Program:
    """Parse a .nfz source text.  Grades written with u/eps use ``config``."""
    from .._deep import deep

    return deep(lambda: _NfzParser(text, config or NUMFUZZ_CONFIG).program())()


def parse_nfz_type_text(text: str, config: RoundingConfig | None = None) -> Type:
    ts = TokenStream(tokenize(text))
    t = parse_nfz_type(ts, config or NUMFUZZ_CONFIG)
    if ts.peek().kind != "eof":
        raise ts.error(f"trailing input {ts.peek().text!r} after type")
    return t
