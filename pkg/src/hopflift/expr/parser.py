"""Recursive-descent parser for the expression grammar.

Grammar (lowest to tightest binding)::

    sum     := product (('+' | '-') product)*
    product := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' unary)?          # right-associative
    primary := NUMBER | IDENT | IDENT '(' sum ')' | '(' sum ')'

Exponents must reduce to rational constants. ``-`` applied directly to a
numeric literal yields a negative literal.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from . import nodes
from .nodes import ADD, DIV, FUNC, MUL, NEG, NUM, POW, Expr


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} at line {line}, column {col}")
        self.line = line
        self.column = col
        self.pos = pos


@dataclass(frozen=True)
class Token:
    kind: str  # 'num', 'ident', 'op', 'end'
    text: str
    pos: int


_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


def tokenize(text: str) -> list:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {text[start]!r}", text, start)
        for kind in ("num", "ident", "op"):
            if m.group(kind) is not None:
                tokens.append(Token(kind, m.group(kind), m.start(kind)))
                break
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


def _literal(text: str):
    if re.fullmatch(r"\d+", text):
        return int(text)
    return float(text)


def rational_value(e: Expr) -> Fraction:
    """Exact value of a constant expression built from literals, or raise."""
    k = e.kind
    if k == NUM:
        return Fraction(e.payload) if not isinstance(e.payload, float) else Fraction(repr(e.payload))
    if k == NEG:
        return -rational_value(e.args[0])
    if k == ADD:
        return sum((rational_value(a) for a in e.args), Fraction(0))
    if k == MUL:
        out = Fraction(1)
        for a in e.args:
            out *= rational_value(a)
        return out
    if k == DIV:
        den = rational_value(e.args[1])
        if den == 0:
            raise ZeroDivisionError("zero denominator in exponent")
        return rational_value(e.args[0]) / den
    if k == POW and e.payload.denominator == 1:
        return rational_value(e.args[0]) ** int(e.payload)
    raise ValueError("exponent is not a rational constant")


class Parser:
    def __init__(self, text: str, constants=()):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.constants = set(constants)

    def peek(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text or tok.kind == "end":
            self.error(f"expected {text!r}", tok)
        return self.advance()

    def error(self, message: str, tok: Token):
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExprSyntaxError(f"{message}, found {found}", self.text, tok.pos)

    def parse(self) -> Expr:
        e = self.sum()
        tok = self.peek()
        if tok.kind != "end":
            self.error("unexpected token", tok)
        return e

    def sum(self) -> Expr:
        terms = [self.product()]
        while self.peek().text in ("+", "-") and self.peek().kind == "op":
            op = self.advance().text
            t = self.product()
            terms.append(t if op == "+" else nodes.make(NEG, None, (t,)))
        return terms[0] if len(terms) == 1 else nodes.make(ADD, None, tuple(terms))

    def product(self) -> Expr:
        factors = [self.unary()]
        while self.peek().text in ("*", "/") and self.peek().kind == "op":
            op = self.advance().text
            rhs = self.unary()
            if op == "*":
                factors.append(rhs)
            else:
                lhs = factors[0] if len(factors) == 1 else nodes.make(MUL, None, tuple(factors))
                factors = [nodes.make(DIV, None, (lhs, rhs))]
        return factors[0] if len(factors) == 1 else nodes.make(MUL, None, tuple(factors))

    def unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            nxt, after = self.tokens[self.i + 1], self.tokens[min(self.i + 2, len(self.tokens) - 1)]
            if nxt.kind == "num" and after.text != "^":
                self.i += 2
                return nodes.num(-_literal(nxt.text))
            self.advance()
            return nodes.make(NEG, None, (self.unary(),))
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            etok = self.peek()
            exponent = self.unary()
            try:
                value = rational_value(exponent)
            except (ValueError, ZeroDivisionError) as exc:
                raise ExprSyntaxError(f"exponent must be a rational constant ({exc})",
                                      self.text, etok.pos) from None
            return nodes.make(POW, value, (base,))
        return base

    def primary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return nodes.num(_literal(tok.text))
        if tok.kind == "ident":
            self.advance()
            if self.peek().text == "(" and self.peek().kind == "op":
                if tok.text not in nodes.FUNCTIONS:
                    raise ExprSyntaxError(f"unknown function {tok.text!r}", self.text, tok.pos)
                self.advance()
                arg = self.sum()
                self.expect(")")
                return nodes.make(FUNC, tok.text, (arg,))
            if tok.text in nodes.FUNCTIONS:
                raise ExprSyntaxError(f"function {tok.text!r} needs an argument", self.text, tok.pos)
            if tok.text in self.constants:
                return nodes.const(tok.text)
            return nodes.var(tok.text)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            e = self.sum()
            self.expect(")")
            return e
        self.error("expected an operand", tok)


def parse_expression(text: str, constants=()) -> Expr:
    """Parse ``text`` into a raw (unsimplified) expression tree.

    Identifiers listed in ``constants`` become named constants; every other
    identifier is a free variable.
    """
    return Parser(text, constants).parse()


def parse_bindings(bindings, texts, constants=()) -> list:
    """Parse ``texts`` after defining each ``(name, text)`` binding in order."""
    defined: dict = {}
    for name, text in bindings:
        if not str(name).isidentifier():
            raise ExprSyntaxError(f"bad binding name {name!r}", str(name), 0)
        defined[name] = nodes.substitute(parse_expression(text, constants), defined)
    return [nodes.substitute(parse_expression(t, constants), defined) for t in texts]
