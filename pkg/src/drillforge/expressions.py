"""Arithmetic expression parser and exact rational evaluator.

Recursive descent over a small grammar (integers, named variables, + - * /,
unary minus, parentheses, standard precedence). Evaluation uses
fractions.Fraction throughout so rendered option texts are unambiguous.

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | atom
    atom  := INT | IDENT | '(' expr ')'
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

from .errors import DrillforgeError


class ExpressionSyntaxError(DrillforgeError):
    """Malformed expression text; carries the character offset of the problem."""

    code = "expr_syntax"

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class EvaluationError(DrillforgeError):
    code = "expr_eval"


class UnboundVariableError(EvaluationError):
    code = "expr_unbound"


class DivisionByZeroError(EvaluationError):
    code = "expr_div_zero"


# ---------------------------------------------------------------------------
# Tree nodes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Literal:
    value: int


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class UnaryOp:
    op: str  # "-"
    operand: "Node"


@dataclass(frozen=True)
class BinaryOp:
    op: str  # "+", "-", "*", "/"
    left: "Node"
    right: "Node"


Node = Union[Literal, Variable, UnaryOp, BinaryOp]


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_OPERATORS = set("+-*/()")


@dataclass(frozen=True)
class _Token:
    kind: str  # "int" | "ident" | "op" | "end"
    text: str
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            start = i
            while i < n and text[i].isdigit():
                i += 1
            tokens.append(_Token("int", text[start:i], start))
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            tokens.append(_Token("ident", text[start:i], start))
            continue
        if ch in _OPERATORS:
            tokens.append(_Token("op", ch, i))
            i += 1
            continue
        raise ExpressionSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect_op(self, op: str) -> None:
        token = self.peek()
        if token.kind == "op" and token.text == op:
            self.advance()
            return
        raise ExpressionSyntaxError(f"expected {op!r}", token.offset)

    def parse_expr(self) -> Node:
        node = self.parse_term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = BinaryOp(op, node, self.parse_term())
        return node

    def parse_term(self) -> Node:
        node = self.parse_unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = BinaryOp(op, node, self.parse_unary())
        return node

    def parse_unary(self) -> Node:
        token = self.peek()
        if token.kind == "op" and token.text == "-":
            self.advance()
            return UnaryOp("-", self.parse_unary())
        return self.parse_atom()

    def parse_atom(self) -> Node:
        token = self.peek()
        if token.kind == "int":
            self.advance()
            return Literal(int(token.text))
        if token.kind == "ident":
            self.advance()
            return Variable(token.text)
        if token.kind == "op" and token.text == "(":
            self.advance()
            node = self.parse_expr()
            self.expect_op(")")
            return node
        raise ExpressionSyntaxError("expected a number, variable or '('", token.offset)


def parse_expression(text: str) -> Node:
    parser = _Parser(_tokenize(text))
    node = parser.parse_expr()
    trailing = parser.peek()
    if trailing.kind != "end":
        raise ExpressionSyntaxError(f"unexpected {trailing.text!r}", trailing.offset)
    return node


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def evaluate(node: Node, bindings: Mapping[str, Union[int, Fraction]]) -> Fraction:
    """Evaluate a parsed tree to an exact rational."""
    if isinstance(node, Literal):
        return Fraction(node.value)
    if isinstance(node, Variable):
        if node.name not in bindings:
            raise UnboundVariableError(f"variable {node.name!r} is not bound")
        return Fraction(bindings[node.name])
    if isinstance(node, UnaryOp):
        return -evaluate(node.operand, bindings)
    if isinstance(node, BinaryOp):
        left = evaluate(node.left, bindings)
        right = evaluate(node.right, bindings)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            if right == 0:
                raise DivisionByZeroError("division by zero")
            return left / right
    raise EvaluationError(f"unknown node {node!r}")


def variables_in(node: Node) -> set[str]:
    if isinstance(node, Variable):
        return {node.name}
    if isinstance(node, UnaryOp):
        return variables_in(node.operand)
    if isinstance(node, BinaryOp):
        return variables_in(node.left) | variables_in(node.right)
    return set()


def format_rational(value: Fraction) -> str:
    """Reduced fraction or plain integer rendering, e.g. 5, -3, 1/2, -7/3."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"
