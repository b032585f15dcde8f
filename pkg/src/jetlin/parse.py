"""Recursive-descent parser for the ODE right-hand side grammar.

Grammar (whitespace insensitive, no implicit multiplication)::

    expr    := term {("+" | "-") term}
    term    := factor {("*" | "/") factor}
    factor  := "-" factor | power
    power   := primary ["^" exponent]
    exponent:= "-" exponent | primary ["^" exponent]      (right associative)
    primary := NUMBER | VARIABLE | ("cbrt" | "ln") "(" expr ")" | "(" expr ")"
    VARIABLE:= "x" | "u" | "u'" | "u''" | "p" | "q"
    NUMBER  := digits ["." digits]                        (converted exactly)

Exponents must reduce to integer literals.  ``u'''`` and unknown identifiers
are rejected with their position.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import sympy as sp

from . import expr as ex
from .errors import NonIntegerExponentError, OdeSyntaxError, UnsupportedVariableError

_VARIABLES = {"x": ex.X, "u": ex.U, "u'": ex.P, "u''": ex.Q, "p": ex.P, "q": ex.Q}
_FUNCTIONS = {"cbrt": ex.cbrt, "ln": ex.ln}


@dataclass(frozen=True)
class Token:
    kind: str  # NUMBER | IDENT | OP | END
    text: str
    pos: int


def _tokenize(text: str) -> list[Token]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            tokens.append(Token("NUMBER", text[i:j], i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            while j < n and text[j] == "'":
                j += 1
            tokens.append(Token("IDENT", text[i:j], i))
            i = j
            continue
        if c in "+-*/^()":
            tokens.append(Token("OP", c, i))
            i += 1
            continue
        raise OdeSyntaxError(f"unexpected character {c!r}", i)
    tokens.append(Token("END", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.names_seen: list[str] = []

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect_op(self, op: str):
        if self.tok.kind == "OP" and self.tok.text == op:
            return self.advance()
        raise OdeSyntaxError(f"expected {op!r}", self.tok.pos)

    def at_op(self, *ops) -> bool:
        return self.tok.kind == "OP" and self.tok.text in ops

    def parse(self) -> sp.Expr:
        e = self.expr()
        if self.tok.kind != "END":
            raise OdeSyntaxError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return e

    def expr(self) -> sp.Expr:
        e = self.term()
        while self.at_op("+", "-"):
            op = self.advance().text
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self) -> sp.Expr:
        e = self.factor()
        while self.at_op("*", "/"):
            op = self.advance()
            rhs = self.factor()
            if op.text == "*":
                e = e * rhs
            else:
                e = e / rhs
                if e.has(sp.zoo, sp.nan):
                    raise OdeSyntaxError("division by zero", op.pos)
        return e

    def factor(self) -> sp.Expr:
        if self.at_op("-"):
            self.advance()
            return -self.factor()
        return self.power()

    def power(self) -> sp.Expr:
        base = self.primary()
        if self.at_op("^"):
            caret = self.advance()
            e = self.exponent(caret)
            result = base**e
            if result.has(sp.zoo, sp.nan):
                raise OdeSyntaxError("zero raised to a negative power", caret.pos)
            return result
        return base

    def exponent(self, caret: Token) -> sp.Integer:
        if self.at_op("-"):
            self.advance()
            return -self.exponent(caret)
        e = self.primary()
        if self.at_op("^"):
            inner = self.advance()
            e = e ** self.exponent(inner)
        if not e.is_Integer:
            raise NonIntegerExponentError(f"exponent must be an integer, got {e}", caret.pos)
        return e

    def primary(self) -> sp.Expr:
        t = self.tok
        if t.kind == "NUMBER":
            self.advance()
            return sp.Rational(Fraction(t.text))
        if t.kind == "IDENT":
            self.advance()
            if t.text in _FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return _FUNCTIONS[t.text](arg)
            if t.text in _VARIABLES:
                self.names_seen.append(t.text)
                return _VARIABLES[t.text]
            raise UnsupportedVariableError(f"unsupported identifier {t.text!r}", t.pos)
        if self.at_op("("):
            self.advance()
            e = self.expr()
            self.expect_op(")")
            return e
        raise OdeSyntaxError(f"expected a value, got {t.text or 'end of input'!r}", t.pos)


@dataclass(frozen=True)
class OdeInput:
    """Parsed right-hand side of u''' = f(x, u, u', u'')."""

    source: str
    f: sp.Expr
    aliases: tuple[str, ...]


def parse_expression(text: str) -> sp.Expr:
    """Parse one expression in the grammar above."""
    return _Parser(text).parse()


def parse_ode(text: str) -> OdeInput:
    """Parse f and record which variable spellings were used."""
    parser = _Parser(text)
    f = parser.parse()
    seen = tuple(dict.fromkeys(parser.names_seen))
    return OdeInput(source=text, f=f, aliases=seen)
