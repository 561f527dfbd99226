import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trscat import expr
from trscat.errors import ParseError, UnknownIdentifierError


@pytest.mark.parametrize("text, x, want", [
    ("1+2*3", 0.0, 7.0),
    ("2^3^2", 0.0, 512.0),
    ("-x^2", 3.0, -9.0),
    ("10+5*cos(4*pi*x)", 0.25, 10 + 5 * math.cos(math.pi)),
    ("tanh(x)*exp(-x)", 1.2, math.tanh(1.2) * math.exp(-1.2)),
    ("sqrt(abs(x))", -4.0, 2.0),
])
def test_evaluate(text, x, want):
    assert expr.evaluate(expr.parse(text), x) == pytest.approx(want, rel=1e-15)


def test_error_offset_points_at_failure():
    with pytest.raises(ParseError) as e:
        expr.parse("cos(")
    assert e.value.offset == 4


def test_unknown_function():
    with pytest.raises(UnknownIdentifierError):
        expr.parse("sech(x)")


@pytest.mark.parametrize("bad", ["", "1+", "(x", "x)", "2**3", "x y"])
def test_rejects_garbage(bad):
    with pytest.raises(ParseError):
        expr.parse(bad)


leaf = st.one_of(
    st.floats(0.1, 9.0, allow_nan=False).map(lambda v: f"{v:.3f}"),
    st.just("x"),
    st.just("pi"),
)


def _combine(children):
    return st.one_of(
        st.tuples(children, st.sampled_from("+-*"), children).map(lambda t: f"({t[0]}{t[1]}{t[2]})"),
        st.tuples(st.sampled_from(["cos", "sin", "tanh"]), children).map(lambda t: f"{t[0]}({t[1]})"),
        children.map(lambda c: f"-{c}"),
    )


expressions = st.recursive(leaf, _combine, max_leaves=12)


@settings(max_examples=150, deadline=None)
@given(expressions, st.floats(-3, 3))
def test_print_parse_roundtrip(text, x):
    node = expr.parse(text)
    again = expr.parse(expr.to_string(node))
    assert expr.to_string(again) == expr.to_string(node)
    a, b = expr.evaluate(node, x), expr.evaluate(again, x)
    assert a == b or (math.isnan(a) and math.isnan(b))


@settings(max_examples=100, deadline=None)
@given(expressions)
def test_postfix_matches_tree(text):
    from trscat._kernels import potential_value

    node = expr.parse(text)
    code, consts = expr.compile_postfix(node)
    empty = np.zeros((1, 4))
    stack = np.zeros(expr.stack_depth(node) + 1)
    for x in (-1.3, 0.0, 0.7, 2.9):
        want = expr.evaluate(node, x)
        got = potential_value(x, code, consts, 0.0, 1.0, empty, stack)
        assert got == pytest.approx(want, rel=1e-12, abs=1e-12)
