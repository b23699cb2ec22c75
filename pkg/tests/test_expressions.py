from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from drillforge.expressions import (
    DivisionByZeroError,
    ExpressionSyntaxError,
    UnboundVariableError,
    evaluate,
    format_rational,
    parse_expression,
    variables_in,
)


def ev(text, **bindings):
    return evaluate(parse_expression(text), bindings)


def test_addition():
    assert ev("a+b", a=2, b=3) == 5


def test_parentheses_and_precedence():
    assert ev("(a+b)*2", a=1, b=2) == 6
    assert ev("a+b*2", a=1, b=2) == 5
    assert ev("2*3+4*5") == 26


def test_trailing_operator_offset():
    with pytest.raises(ExpressionSyntaxError) as err:
        parse_expression("a+")
    assert err.value.offset == 2


def test_unexpected_character_offset():
    with pytest.raises(ExpressionSyntaxError) as err:
        parse_expression("a + $")
    assert err.value.offset == 4


def test_unbalanced_paren():
    with pytest.raises(ExpressionSyntaxError):
        parse_expression("(a+b")
    with pytest.raises(ExpressionSyntaxError):
        parse_expression("a+b)")


def test_exact_division():
    assert ev("a/b", a=1, b=2) == Fraction(1, 2)
    assert ev("a/b/c", a=1, b=2, c=3) == Fraction(1, 6)


def test_division_by_zero():
    with pytest.raises(DivisionByZeroError):
        ev("a/b", a=1, b=0)


def test_unary_minus():
    assert ev("-a", a=7) == -7
    assert ev("--a", a=7) == 7
    assert ev("-a*b", a=2, b=3) == -6
    assert ev("a--b", a=1, b=2) == 3


def test_unbound_variable():
    with pytest.raises(UnboundVariableError):
        ev("a+b", a=1)


def test_variables_in():
    assert variables_in(parse_expression("(a+b)*c - 2")) == {"a", "b", "c"}
    assert variables_in(parse_expression("1+2")) == set()


def test_format_rational():
    assert format_rational(Fraction(5)) == "5"
    assert format_rational(Fraction(-3)) == "-3"
    assert format_rational(Fraction(1, 2)) == "1/2"
    assert format_rational(Fraction(7, -3)) == "-7/3"
    assert format_rational(Fraction(4, 2)) == "2"


@given(st.integers(-50, 50), st.integers(-50, 50), st.integers(-50, 50))
def test_matches_python_arithmetic(a, b, c):
    assert ev("a*b+c", a=a, b=b, c=c) == a * b + c
    assert ev("a-(b-c)", a=a, b=b, c=c) == a - (b - c)
    assert ev("-(a+b)*c", a=a, b=b, c=c) == -(a + b) * c


@given(st.integers(-30, 30), st.integers(1, 30))
def test_division_matches_fraction(p, q):
    assert ev("p/q", p=p, q=q) == Fraction(p, q)
