"""Parser for the ring language ``GF(q)[x1,...,xm]/(f1,...,fk)``.

Polynomials use ``+ - * ^``, parentheses and integer literals; whitespace is
ignored.  Errors carry the 1-based line and column of the offending token.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import RingSyntaxError
from .fields import GF, FiniteField, prime_power
from .poly import Poly

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*^/(),\[\]]))")


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _position(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def tokenize(text: str) -> list[_Tok]:
    toks = []
    i = 0
    while i < len(text):
        if text[i].isspace():
            i += 1
            continue
        m = _TOKEN.match(text, i)
        if not m or m.end() == i:
            line, col = _position(text, i)
            raise RingSyntaxError(f"unexpected character {text[i]!r}", line, col)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        i = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        line, col = _position(self.text, tok.pos)
        raise RingSyntaxError(msg, line, col)

    def take(self, text: str | None = None, kind: str | None = None) -> _Tok:
        tok = self.peek()
        if (text is not None and tok.text != text) or (kind is not None and tok.kind != kind):
            want = repr(text) if text is not None else kind
            self.fail(f"expected {want}, found {tok.text or 'end of input'!r}")
        self.i += 1
        return tok

    def accept(self, text: str) -> bool:
        if self.peek().text == text and self.peek().kind == "op":
            self.i += 1
            return True
        return False

    # polynomial grammar: expr := term (('+'|'-') term)* ; term := factor ('*' factor)* ;
    # factor := ('-' factor) | atom ('^' int)? ; atom := int | name | '(' expr ')'
    def expr(self, field, names) -> Poly:
        self.accept("+")
        acc = self.term(field, names)
        while self.peek().kind == "op" and self.peek().text in ("+", "-"):
            op = self.take().text
            t = self.term(field, names)
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self, field, names) -> Poly:
        acc = self.factor(field, names)
        while self.accept("*"):
            acc = acc * self.factor(field, names)
        return acc

    def factor(self, field, names) -> Poly:
        if self.accept("-"):
            return -self.factor(field, names)
        base = self.atom(field, names)
        if self.accept("^"):
            tok = self.take(kind="int")
            base = base ** int(tok.text)
        return base

    def atom(self, field: FiniteField, names) -> Poly:
        tok = self.peek()
        n = len(names)
        if tok.kind == "int":
            self.i += 1
            return Poly.constant(field, n, field.from_int(int(tok.text)))
        if tok.kind == "name":
            self.i += 1
            if tok.text not in names:
                self.fail(f"unknown variable {tok.text!r}", tok)
            return Poly.var(field, n, names.index(tok.text))
        if self.accept("("):
            e = self.expr(field, names)
            self.take(")")
            return e
        self.fail(f"unexpected {tok.text or 'end of input'!r}")


@dataclass
class RingDescription:
    text: str
    q: int
    field: FiniteField
    generators: list[str]
    relations: list[Poly]

    def to_algebra(self, **kw):
        from .algebra import build_algebra
        return build_algebra(self.field, self.generators, self.relations, **kw)


def parse_ring(text: str) -> RingDescription:
    """Parse ``GF(q)[vars]/(rels)``; the variable list and relations are optional."""
    ps = _Parser(text)
    head = ps.take(kind="name")
    if head.text != "GF":
        ps.fail("ring must start with GF(q)", head)
    ps.take("(")
    qtok = ps.take(kind="int")
    ps.take(")")
    q = int(qtok.text)
    prime_power(q)
    field = GF(q)
    names: list[str] = []
    if ps.accept("["):
        if not ps.accept("]"):
            while True:
                tok = ps.take(kind="name")
                if tok.text in names:
                    ps.fail(f"duplicate variable {tok.text!r}", tok)
                if tok.text == "GF":
                    ps.fail("GF is reserved", tok)
                names.append(tok.text)
                if ps.accept("]"):
                    break
                ps.take(",")
    rels: list[Poly] = []
    if ps.accept("/"):
        ps.take("(")
        if not ps.accept(")"):
            while True:
                rels.append(ps.expr(field, names))
                if ps.accept(")"):
                    break
                ps.take(",")
    ps.take(kind="end")
    return RingDescription(text, q, field, names, rels)


def parse_polys(text: str, field: FiniteField, names: list[str]) -> list[Poly]:
    """Comma-separated polynomial list in the given variables."""
    ps = _Parser(text)
    out = []
    if ps.peek().kind == "end":
        return out
    while True:
        out.append(ps.expr(field, names))
        if ps.peek().kind == "end":
            break
        ps.take(",")
    return out
