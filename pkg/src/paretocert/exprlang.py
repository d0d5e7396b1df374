"""Arithmetic expression language for criterion and constraint functions.

Grammar:

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := atom ['^' number]
    atom   := number | ident | '-' atom | '(' expr ')'
    ident  := ('x' | 'y') digits
    number := integer or decimal literal; exponents may also be fractions like 3/2

Variables ``x0..x{n-1}`` live in the decision space and ``y0..y{p-1}`` in the
criterion space. Exponents must be constants and are kept as exact rationals:
``a^(r/s)`` uses the sign-aware real root when ``s`` is odd and rejects
negative bases when ``s`` is even. Derivatives are exact forward-mode duals
over the AST, not finite differences.

Expressions are immutable after :func:`parse`; :func:`evaluate` and
:func:`gradient` are pure and safe to call from any number of threads.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import (
    DimensionError,
    DomainError,
    ExprSyntaxError,
    NonConstantExponent,
    NonDifferentiable,
)

Node = Union["Const", "Var", "Neg", "BinOp", "Pow"]


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    kind: str  # 'x' or 'y'
    index: int


@dataclass(frozen=True)
class Neg:
    operand: Node


@dataclass(frozen=True)
class BinOp:
    op: str  # one of '+', '-', '*', '/'
    left: Node
    right: Node


@dataclass(frozen=True)
class Pow:
    base: Node
    exponent: Fraction


@dataclass(frozen=True)
class Expression:
    """A parsed expression together with the dimensions it was checked against.

    ``space`` records which variable family the expression binds to; points
    passed to :func:`evaluate` and :func:`gradient` must have the matching
    length (``decision_dim`` for 'x', ``criterion_dim`` for 'y').
    """

    root: Node
    decision_dim: int
    criterion_dim: int
    space: str

    @property
    def point_dim(self) -> int:
        return self.decision_dim if self.space == "x" else self.criterion_dim


# ---------------------------------------------------------------------------
# lexer / parser

_NUMBER_RE = re.compile(r"\d+(?:\.\d+)?|\.\d+")
_IDENT_RE = re.compile(r"[A-Za-z]+\d*")
_VAR_RE = re.compile(r"([xy])(\d+)\Z")


@dataclass(frozen=True)
class _Token:
    kind: str  # 'number' | 'ident' | '+', '-', '*', '/', '^', '(', ')' | 'end'
    text: str
    pos: int


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    n = len(source)
    while pos < n:
        ch = source[pos]
        if ch.isspace():
            pos += 1
            continue
        if ch.isdigit() or ch == ".":
            m = _NUMBER_RE.match(source, pos)
            if m is None:
                raise ExprSyntaxError("malformed number", pos, expected=("number",))
            tokens.append(_Token("number", m.group(), pos))
            pos = m.end()
        elif ch.isalpha():
            m = _IDENT_RE.match(source, pos)
            assert m is not None
            tokens.append(_Token("ident", m.group(), pos))
            pos = m.end()
        elif ch in "+-*/^()":
            tokens.append(_Token(ch, ch, pos))
            pos += 1
        else:
            raise ExprSyntaxError(
                f"unexpected character {ch!r}", pos, expected=("number", "variable", "operator")
            )
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], decision_dim: int, criterion_dim: int):
        self.tokens = tokens
        self.i = 0
        self.decision_dim = decision_dim
        self.criterion_dim = criterion_dim
        self.used_kinds: set[str] = set()

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def take(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.take()
        if tok.kind != kind:
            raise ExprSyntaxError(
                f"found {tok.text!r}" if tok.text else "unexpected end of input",
                tok.pos,
                expected=(kind,),
            )
        return tok

    def parse_expr(self) -> Node:
        node = self.parse_term()
        while self.peek().kind in ("+", "-"):
            op = self.take().kind
            node = BinOp(op, node, self.parse_term())
        return node

    def parse_term(self) -> Node:
        node = self.parse_factor()
        while self.peek().kind in ("*", "/"):
            op = self.take().kind
            node = BinOp(op, node, self.parse_factor())
        return node

    def parse_factor(self) -> Node:
        base = self.parse_atom()
        if self.peek().kind == "^":
            self.take()
            return Pow(base, self.parse_exponent())
        return base

    def parse_exponent(self) -> Fraction:
        tok = self.peek()
        if tok.kind != "number":
            raise NonConstantExponent(
                f"exponent must be a numeric constant, found {tok.text!r}",
                tok.pos,
                expected=("number",),
            )
        self.take()
        value = Fraction(tok.text)
        # a '/' directly followed by a number is part of the exponent (e.g. y0^3/2)
        if self.peek().kind == "/" and self.tokens[self.i + 1].kind == "number":
            self.take()
            den_tok = self.take()
            den = Fraction(den_tok.text)
            if den == 0:
                raise ExprSyntaxError("zero denominator in exponent", den_tok.pos)
            value /= den
        return value

    def parse_atom(self) -> Node:
        tok = self.take()
        if tok.kind == "number":
            return Const(float(tok.text))
        if tok.kind == "ident":
            m = _VAR_RE.match(tok.text)
            if m is None:
                raise ExprSyntaxError(
                    f"unknown identifier {tok.text!r}", tok.pos, expected=("x<k>", "y<k>")
                )
            kind, index = m.group(1), int(m.group(2))
            dim = self.decision_dim if kind == "x" else self.criterion_dim
            if index >= dim:
                space = "decision" if kind == "x" else "criterion"
                raise DimensionError(
                    f"variable {tok.text} out of range: {space} dimension is {dim}"
                )
            self.used_kinds.add(kind)
            return Var(kind, index)
        if tok.kind == "-":
            return Neg(self.parse_atom())
        if tok.kind == "(":
            node = self.parse_expr()
            self.expect(")")
            return node
        raise ExprSyntaxError(
            f"found {tok.text!r}" if tok.text else "unexpected end of input",
            tok.pos,
            expected=("number", "variable", "'-'", "'('"),
        )


def parse(source: str, decision_dim: int, criterion_dim: int) -> Expression:
    """Parse ``source`` against the declared decision and criterion dimensions."""
    if decision_dim < 0 or criterion_dim < 0:
        raise DimensionError("dimensions must be non-negative")
    parser = _Parser(_tokenize(source), decision_dim, criterion_dim)
    root = parser.parse_expr()
    parser.expect("end")
    if parser.used_kinds == {"x", "y"}:
        raise DimensionError("expression mixes decision (x) and criterion (y) variables")
    if "x" in parser.used_kinds:
        space = "x"
    elif "y" in parser.used_kinds:
        space = "y"
    else:
        space = "x" if criterion_dim == 0 else "y"
    return Expression(root, decision_dim, criterion_dim, space)


# ---------------------------------------------------------------------------
# evaluation

def _pow_value(base: float, q: Fraction) -> float:
    if q == 0:
        return 1.0
    if base == 0.0:
        if q < 0:
            raise DomainError("zero base with a negative exponent")
        return 0.0
    try:
        if q.denominator == 1:
            return float(base) ** q.numerator
        if base < 0.0:
            if q.denominator % 2 == 0:
                raise DomainError(
                    f"negative base {base} with even-denominator exponent {q}"
                )
            magnitude = (-base) ** float(q)
            return -magnitude if q.numerator % 2 else magnitude
        return base ** float(q)
    except OverflowError:
        raise DomainError(f"overflow computing {base} ^ {q}") from None


def _eval(node: Node, point: tuple[float, ...]) -> float:
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return point[node.index]
    if isinstance(node, Neg):
        return -_eval(node.operand, point)
    if isinstance(node, Pow):
        return _pow_value(_eval(node.base, point), node.exponent)
    left = _eval(node.left, point)
    right = _eval(node.right, point)
    op = node.op
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    if right == 0.0:
        raise DomainError("division by zero")
    return left / right


def _check_point(expr: Expression, point) -> tuple[float, ...]:
    pt = tuple(float(v) for v in point)
    if len(pt) != expr.point_dim:
        raise DimensionError(
            f"expected a point of length {expr.point_dim}, got {len(pt)}"
        )
    return pt


def evaluate(expr: Expression, point) -> float:
    """Evaluate ``expr`` at ``point`` with standard real arithmetic.

    Raises DomainError rather than returning a non-finite value.
    """
    value = _eval(expr.root, _check_point(expr, point))
    if not math.isfinite(value):
        raise DomainError(f"evaluation produced a non-finite value at {point}")
    return value


# ---------------------------------------------------------------------------
# forward-mode differentiation

def _eval_dual(node: Node, point: tuple[float, ...], k: int) -> tuple[float, float]:
    if isinstance(node, Const):
        return node.value, 0.0
    if isinstance(node, Var):
        return point[node.index], 1.0 if node.index == k else 0.0
    if isinstance(node, Neg):
        v, d = _eval_dual(node.operand, point, k)
        return -v, -d
    if isinstance(node, Pow):
        bv, bd = _eval_dual(node.base, point, k)
        q = node.exponent
        value = _pow_value(bv, q)
        if q == 0:
            return value, 0.0
        if bv == 0.0:
            # q < 0 is already a DomainError inside _pow_value
            if q == 1:
                return value, bd
            if q > 1:
                return value, 0.0
            raise NonDifferentiable(
                f"base^({q}) has no derivative at base 0 (exponent between 0 and 1)"
            )
        return value, float(q) * _pow_value(bv, q - 1) * bd
    lv, ld = _eval_dual(node.left, point, k)
    rv, rd = _eval_dual(node.right, point, k)
    op = node.op
    if op == "+":
        return lv + rv, ld + rd
    if op == "-":
        return lv - rv, ld - rd
    if op == "*":
        return lv * rv, ld * rv + lv * rd
    if rv == 0.0:
        raise DomainError("division by zero")
    return lv / rv, (ld * rv - lv * rd) / (rv * rv)


def gradient(expr: Expression, point) -> tuple[float, ...]:
    """Exact gradient of ``expr`` at ``point``, one dual-number pass per variable."""
    pt = _check_point(expr, point)
    out = []
    for k in range(len(pt)):
        value, deriv = _eval_dual(expr.root, pt, k)
        if not math.isfinite(value) or not math.isfinite(deriv):
            raise DomainError(f"derivative produced a non-finite value at {point}")
        out.append(deriv)
    return tuple(out)


# ---------------------------------------------------------------------------
# canonical printer

def _fmt_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _fmt_exponent(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _print_atom(node: Node) -> str:
    if isinstance(node, Var):
        return _print(node)
    if isinstance(node, Const) and node.value >= 0:
        return _print(node)
    return f"({_print(node)})"


def _print(node: Node) -> str:
    if isinstance(node, Const):
        return _fmt_number(node.value)
    if isinstance(node, Var):
        return f"{node.kind}{node.index}"
    if isinstance(node, Neg):
        return f"-{_print_atom(node.operand)}"
    if isinstance(node, Pow):
        if node.exponent < 0:
            # the grammar has no negative exponents; print the reciprocal instead
            return f"(1 / {_print_atom(node.base)}^{_fmt_exponent(-node.exponent)})"
        return f"{_print_atom(node.base)}^{_fmt_exponent(node.exponent)}"
    return f"({_print(node.left)} {node.op} {_print(node.right)})"


def to_source(expr: Expression | Node) -> str:
    """Render an expression as parseable source text (canonical, fully parenthesized)."""
    node = expr.root if isinstance(expr, Expression) else expr
    return _print(node)
