"""Analytic expression grammar.

Expressions are plain text over the identifiers ``t, x, y, z``::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("+" | "-") unary | power
    power   := primary ("^" unary)?          # right associative
    primary := NUMBER | IDENT | FUNC "(" expr ")" | "(" expr ")"

with ``FUNC`` one of ``sin cos exp sqrt tanh abs log``.  Numeric literals are
kept as exact rationals so that symbolic derivatives carry no rounding.  The
parser only validates and builds the tree; differentiation and evaluation are
delegated to sympy.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property

import sympy as sp

from .errors import ExpressionError

T, X, Y, Z = sp.symbols("t x y z", real=True)
COORDS = (T, X, Y, Z)
_IDENTS = {"t": T, "x": X, "y": Y, "z": Z}
FUNCTIONS = {
    "sin": sp.sin,
    "cos": sp.cos,
    "exp": sp.exp,
    "sqrt": sp.sqrt,
    "tanh": sp.tanh,
    "abs": sp.Abs,
    "log": sp.log,
}

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        if source[pos:].strip() == "":
            break
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            start = pos + (len(source[pos:]) - len(source[pos:].lstrip()))
            raise ExpressionError("unexpected character", source[start], start)
        kind = m.lastgroup
        text = m.group(kind)
        tokens.append(Token(kind, text, m.start(kind)))
        pos = m.end()
    tokens.append(Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.i = 0

    def peek(self) -> Token:
        return self.tokens[self.i]

    def take(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> None:
        tok = self.take()
        if tok.text != text:
            raise ExpressionError(f"expected {text!r}, got", tok.text or "<end>", tok.pos)

    def parse(self) -> sp.Expr:
        if self.peek().kind == "end":
            raise ExpressionError("empty expression")
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExpressionError("unexpected token", tok.text, tok.pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            rhs = self.term()
            node = node + rhs if op == "+" else node - rhs
        return node

    def term(self):
        node = self.unary()
        while self.peek().text in ("*", "/"):
            op = self.take().text
            rhs = self.unary()
            node = node * rhs if op == "*" else node / rhs
        return node

    def unary(self):
        tok = self.peek()
        if tok.text == "-":
            self.take()
            return -self.unary()
        if tok.text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.primary()
        if self.peek().text == "^":
            self.take()
            return base ** self.unary()
        return base

    def primary(self):
        tok = self.take()
        if tok.kind == "num":
            return sp.Rational(tok.text)
        if tok.kind == "name":
            if tok.text in _IDENTS:
                return _IDENTS[tok.text]
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return FUNCTIONS[tok.text](arg)
            raise ExpressionError("unknown identifier", tok.text, tok.pos)
        if tok.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExpressionError("unexpected token", tok.text or "<end>", tok.pos)


def parse_expression(source) -> sp.Expr:
    """Parse ``source`` (a string or a plain number) into a sympy expression."""
    if isinstance(source, bool):
        raise ExpressionError("booleans are not expressions", str(source))
    if isinstance(source, (int, float)):
        return sp.Rational(repr(source)) if isinstance(source, float) else sp.Integer(source)
    if not isinstance(source, str):
        raise ExpressionError("expression must be a string or number", repr(source))
    return _Parser(source).parse()


@dataclass(frozen=True)
class Expression:
    """A parsed expression together with its numpy-evaluable form."""

    source: str
    sym: sp.Expr

    @classmethod
    def parse(cls, source) -> "Expression":
        return cls(str(source), parse_expression(source))

    @classmethod
    def from_sympy(cls, sym: sp.Expr) -> "Expression":
        return cls(str(sym), sym)

    @cached_property
    def func(self):
        return sp.lambdify(COORDS, self.sym, modules="numpy")

    def __call__(self, t, x, y, z):
        return self.func(t, x, y, z)

    def diff(self, var: sp.Symbol) -> "Expression":
        return Expression.from_sympy(sp.diff(self.sym, var))
