"""Tokenizer and recursive-descent expression parser shared by the
expression, superfunction and scene readers.

Expression grammar::

    expr   := term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := '-' factor | atom ('^' ['-'] int)?
    atom   := number | name | '(' expr ')' | func '(' expr ')'
    func   := 'sin' | 'cos' | 'exp' | 'sqrt'

Unary minus binds looser than ``^`` so that ``-x^2`` reads as ``-(x^2)``.
The parser returns a small tuple AST that callers interpret into their
own algebra (``symcore.Expr`` or ``grassmann.SuperFunction``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .errors import ParseError

FUNCTIONS = ("sin", "cos", "exp", "sqrt")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<number>\d+(?:\.\d+)?(?:/\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>->|[-+*^()\[\]{},;:=|])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # 'number' | 'name' | 'op' | 'nl' | 'eof'
    text: str
    pos: int
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, line, pos - line_start + 1)
        kind = m.lastgroup
        assert kind is not None
        if kind == "nl":
            tokens.append(Token("nl", "\n", pos, line, pos - line_start + 1))
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), pos, line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", pos, line, pos - line_start + 1))
    return tokens


def parse_number(text: str) -> Fraction:
    if "." in text and "/" in text:
        whole, den = text.split("/")
        return Fraction(whole) / int(den)
    return Fraction(text)


def error_at(tok: Token, message: str) -> ParseError:
    return ParseError(message, tok.pos, tok.line, tok.col)


class ExprParser:
    """Parses one expression from ``tokens[start:]``.

    Newlines are skipped inside parentheses; at depth zero they (like ``;``,
    ``}``, ``,`` and ``)`` ) end the expression.
    """

    def __init__(self, tokens: list[Token], start: int = 0):
        self.tokens = tokens
        self.i = start
        self.depth = 0

    def peek(self) -> Token:
        while self.depth > 0 and self.tokens[self.i].kind == "nl":
            self.i += 1
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text or tok.kind not in ("op", "name"):
            raise error_at(tok, f"expected {text!r}, found {tok.text or 'end of input'!r}")
        return self.advance()

    def parse(self) -> tuple:
        node = self.expr()
        return node

    def expr(self) -> tuple:
        node = self.term()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in ("+", "-"):
                self.advance()
                rhs = self.term()
                node = ("add" if tok.text == "+" else "sub", node, rhs)
            else:
                return node

    def term(self) -> tuple:
        node = self.factor()
        while self.peek().kind == "op" and self.peek().text == "*":
            self.advance()
            node = ("mul", node, self.factor())
        return node

    def factor(self) -> tuple:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return ("neg", self.factor())
        node = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            sign = 1
            if self.peek().kind == "op" and self.peek().text == "-":
                self.advance()
                sign = -1
            num = self.advance()
            if num.kind != "number" or not num.text.isdigit():
                raise error_at(num, "exponent must be an integer")
            node = ("pow", node, sign * int(num.text), tok.pos)
        return node

    def atom(self) -> tuple:
        tok = self.advance()
        if tok.kind == "number":
            return ("num", parse_number(tok.text))
        if tok.kind == "name":
            if tok.text in FUNCTIONS:
                self.expect("(")
                self.depth += 1
                arg = self.expr()
                self.expect(")")
                self.depth -= 1
                return ("call", tok.text, arg, tok.pos)
            return ("var", tok.text, tok.pos)
        if tok.kind == "op" and tok.text == "(":
            self.depth += 1
            node = self.expr()
            self.expect(")")
            self.depth -= 1
            return node
        raise error_at(tok, f"unexpected {tok.text or 'end of input'!r}")


def parse_ast(text: str) -> tuple:
    """Parse a complete expression string into an AST."""
    tokens = tokenize(text)
    parser = ExprParser(tokens)
    node = parser.parse()
    tok = parser.peek()
    while tok.kind == "nl":
        parser.advance()
        tok = parser.peek()
    if tok.kind != "eof":
        raise error_at(tok, f"unexpected {tok.text!r}")
    return node


def interpret(node: tuple, algebra: Any) -> Any:
    """Fold an AST through ``algebra``, an object providing ``const``,
    ``var(name, pos)``, ``call(fname, value, pos)`` and ``power(value, n, pos)``;
    sums and products use the values' own operators."""
    kind = node[0]
    if kind == "num":
        return algebra.const(node[1])
    if kind == "var":
        return algebra.var(node[1], node[2])
    if kind == "add":
        return interpret(node[1], algebra) + interpret(node[2], algebra)
    if kind == "sub":
        return interpret(node[1], algebra) - interpret(node[2], algebra)
    if kind == "mul":
        return interpret(node[1], algebra) * interpret(node[2], algebra)
    if kind == "neg":
        return -interpret(node[1], algebra)
    if kind == "pow":
        return algebra.power(interpret(node[1], algebra), node[2], node[3])
    if kind == "call":
        return algebra.call(node[1], interpret(node[2], algebra), node[3])
    raise AssertionError(kind)

