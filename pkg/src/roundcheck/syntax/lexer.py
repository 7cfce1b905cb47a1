"""Tokenizer shared by the .nfz and .bean parsers."""

from __future__ import annotations

import re
from dataclasses import dataclass


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}" if line else message)


@dataclass(frozen=True)
class Token:
    kind: str  # ident | num | sym | eof
    text: str
    line: int
    col: int

    @property
    def pos(self) -> tuple[int, int]:
        return (self.line, self.col)


_SYMBOLS = [
    ":=", "=>", "->", "-o",
    "⊸", "⊗", "⟨", "⟩", "∞", "ε", "→",
    "&", "+", "*", "!", "[", "]", "{", "}", "(", ")", ",", ";", ":", "=", "|", "<", ">", "/",
]
_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)"
    r"|(?P<nl>\n)"
    r"|(?P<comment>//[^\n]*)"
    r"|(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<sym>" + "|".join(re.escape(s) for s in _SYMBOLS) + r")"
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("num", "ident", "sym"):
            tokens.append(Token(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self, k: int = 0) -> Token:
        j = min(self.i + k, len(self.tokens) - 1)
        return self.tokens[j]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at(self, *texts: str) -> bool:
        tok = self.peek()
        return tok.kind in ("sym", "ident") and tok.text in texts

    def accept(self, *texts: str) -> Token | None:
        if self.at(*texts):
            return self.next()
        return None

    def expect(self, *texts: str) -> Token:
        tok = self.peek()
        if tok.kind in ("sym", "ident") and tok.text in texts:
            return self.next()
        want = " or ".join(repr(t) for t in texts)
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"expected {want}, found {found}", tok.line, tok.col)

    def expect_ident(self, what: str = "identifier") -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            found = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise ParseError(f"expected {what}, found {found}", tok.line, tok.col)
        return self.next()

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, tok.line, tok.col)
