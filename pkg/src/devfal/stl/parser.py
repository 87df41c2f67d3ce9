"""Recursive-descent parser for the concrete formula syntax.

Grammar (whitespace-insensitive, one formula per string)::

    formula   := or_form
    or_form   := and_form ('or' and_form)*
    and_form  := until_form ('and' until_form)*
    until_form:= unary ('U' interval until_form)?          # right-associative
    unary     := 'not' unary
               | 'G' interval unary
               | 'F' interval unary
               | '(' formula ')'
               | predicate
    predicate := expr cmp expr          cmp := '<' | '>' | '<=' | '>='
    interval  := '[' number ',' number ']'
    expr      := term (('+' | '-') term)*
    term      := '-' term | atom ('*' atom)?
    atom      := number | channel | 'abs' '(' expr ')'

Multiplication requires a numeric literal on at least one side; the grammar
has no parenthesized arithmetic, so '(' always opens a sub-formula.

Comparisons are normalized at parse time to the positive-margin form
``mu > 0``: `lhs > rhs` and `lhs >= rhs` become `lhs - rhs`, `lhs < rhs` and
`lhs <= rhs` become `rhs - lhs`.  A literal-zero side is elided so printed
formulas re-parse to the identical tree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .formula import (
    Abs,
    Add,
    Always,
    And,
    Channel,
    Const,
    Eventually,
    Expr,
    Formula,
    Interval,
    IntervalError,
    Not,
    Or,
    Predicate,
    Scale,
    Sub,
    Until,
)

__all__ = ["parse", "FormulaSyntaxError", "IntervalError"]


class FormulaSyntaxError(ValueError):
    """Parse failure, carrying position and the tokens that were expected."""

    def __init__(self, message: str, line: int, column: int, expected: tuple[str, ...] = ()):
        self.line = line
        self.column = column
        self.expected = expected
        hint = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"{message} at line {line}, column {column}{hint}")


_TOKEN_RE = re.compile(
    r"""
    (?P<NUMBER>\d+(\.\d+)?([eE][+-]?\d+)?)
  | (?P<NAME>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<LE><=) | (?P<GE>>=) | (?P<LT><) | (?P<GT>>)
  | (?P<LPAREN>\() | (?P<RPAREN>\))
  | (?P<LBRACK>\[) | (?P<RBRACK>\])
  | (?P<COMMA>,) | (?P<PLUS>\+) | (?P<MINUS>-) | (?P<STAR>\*)
  | (?P<WS>\s+)
  | (?P<BAD>.)
    """,
    re.VERBOSE,
)

_KEYWORDS = {"not", "and", "or", "abs"}


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        tok = m.group()
        if kind == "WS":
            newlines = tok.count("\n")
            if newlines:
                line += newlines
                col = len(tok) - tok.rfind("\n")
            else:
                col += len(tok)
            continue
        if kind == "BAD":
            raise FormulaSyntaxError(f"unexpected character {tok!r}", line, col)
        if kind == "NAME" and tok in _KEYWORDS:
            kind = tok.upper()
        tokens.append(_Token(kind, tok, line, col))
        col += len(tok)
    tokens.append(_Token("END", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            self.fail(tok, (what,))
        return self.advance()

    def fail(self, tok: _Token, expected: tuple[str, ...]):
        shown = tok.text if tok.kind != "END" else "end of input"
        raise FormulaSyntaxError(f"unexpected {shown!r}", tok.line, tok.column, expected)

    # -- formulas -----------------------------------------------------------

    def formula(self) -> Formula:
        node = self.and_form()
        while self.peek().kind == "OR":
            self.advance()
            node = Or(node, self.and_form())
        return node

    def and_form(self) -> Formula:
        node = self.until_form()
        while self.peek().kind == "AND":
            self.advance()
            node = And(node, self.until_form())
        return node

    def until_form(self) -> Formula:
        node = self.unary()
        tok = self.peek()
        if tok.kind == "NAME" and tok.text == "U" and self._next_is_interval():
            self.advance()
            iv = self.interval()
            return Until(iv, node, self.until_form())
        return node

    def _next_is_interval(self) -> bool:
        return self.tokens[self.pos + 1].kind == "LBRACK"

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "NOT":
            self.advance()
            return Not(self.unary())
        if tok.kind == "NAME" and tok.text in ("G", "F") and self._next_is_interval():
            self.advance()
            iv = self.interval()
            child = self.unary()
            return Always(iv, child) if tok.text == "G" else Eventually(iv, child)
        if tok.kind == "LPAREN":
            self.advance()
            node = self.formula()
            self.expect("RPAREN", "')'")
            return node
        return self.predicate()

    def interval(self) -> Interval:
        open_tok = self.expect("LBRACK", "'['")
        lo = self.signed_number()
        self.expect("COMMA", "','")
        hi = self.signed_number()
        self.expect("RBRACK", "']'")
        try:
            return Interval(lo, hi)
        except IntervalError as exc:
            raise IntervalError(f"{exc} (at line {open_tok.line}, column {open_tok.column})") from None

    def signed_number(self) -> float:
        sign = 1.0
        if self.peek().kind == "MINUS":
            self.advance()
            sign = -1.0
        tok = self.expect("NUMBER", "a number")
        return sign * float(tok.text)

    def predicate(self) -> Formula:
        lhs = self.expr()
        tok = self.peek()
        if tok.kind not in ("LT", "GT", "LE", "GE"):
            self.fail(tok, ("'<'", "'>'", "'<='", "'>='"))
        self.advance()
        rhs = self.expr()
        if tok.kind in ("GT", "GE"):
            margin = _sub_elide_zero(lhs, rhs)
        else:
            margin = _sub_elide_zero(rhs, lhs)
        return Predicate(margin)

    # -- arithmetic ----------------------------------------------------------

    def expr(self) -> Expr:
        node = self.term()
        while self.peek().kind in ("PLUS", "MINUS"):
            op = self.advance()
            rhs = self.term()
            node = Add(node, rhs) if op.kind == "PLUS" else Sub(node, rhs)
        return node

    def term(self) -> Expr:
        if self.peek().kind == "MINUS":
            self.advance()
            return _negate(self.term())
        node = self.atom()
        if self.peek().kind == "STAR":
            star = self.advance()
            rhs = self.atom()
            node = _scale(node, rhs, star)
        return node

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.advance()
            return Const(float(tok.text))
        if tok.kind == "ABS":
            self.advance()
            self.expect("LPAREN", "'('")
            inner = self.expr()
            self.expect("RPAREN", "')'")
            return Abs(inner)
        if tok.kind == "NAME":
            self.advance()
            return Channel(tok.text)
        self.fail(tok, ("a number", "a channel name", "'abs('"))
        raise AssertionError("unreachable")


def _negate(e: Expr) -> Expr:
    if isinstance(e, Const):
        return Const(-e.value)
    if isinstance(e, Scale):
        return Scale(-e.coef, e.arg)
    return Scale(-1.0, e)


def _scale(left: Expr, right: Expr, star: _Token) -> Expr:
    if isinstance(left, Const):
        coef, arg = left.value, right
    elif isinstance(right, Const):
        coef, arg = right.value, left
    else:
        raise FormulaSyntaxError(
            "multiplication requires a numeric coefficient on one side",
            star.line,
            star.column,
        )
    if isinstance(arg, Const):
        return Const(coef * arg.value)
    if isinstance(arg, Scale):
        return Scale(coef * arg.coef, arg.arg)
    return Scale(coef, arg)


def _sub_elide_zero(lhs: Expr, rhs: Expr) -> Expr:
    # keep `x > 0` as margin `x`, not `x - 0`, so printing round-trips
    if isinstance(rhs, Const) and rhs.value == 0.0:
        return lhs
    if isinstance(lhs, Const) and lhs.value == 0.0:
        return _negate(rhs)
    return Sub(lhs, rhs)


def parse(text: str) -> Formula:
    """Parse concrete syntax into a formula tree.

    Raises FormulaSyntaxError with position info on malformed input and
    IntervalError when a temporal bound is negative or decreasing.
    """
    parser = _Parser(_tokenize(text))
    node = parser.formula()
    tok = parser.peek()
    if tok.kind != "END":
        parser.fail(tok, ("end of input",))
    return node
