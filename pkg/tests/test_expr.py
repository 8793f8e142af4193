from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metriclag import expr as ex
from metriclag.errors import EvaluationError, ExprSyntaxError, UnknownIdentifierError
from metriclag.props import random_expr


def test_precedence_and_right_associative_power():
    assert ex.evaluate(ex.parse("2^3^2"), {}) == 512.0
    assert ex.evaluate(ex.parse("-2^2"), {}) == -4.0
    assert ex.evaluate(ex.parse("1 + 2*3 - 4/2"), {}) == 5.0


def test_functions_and_arrays():
    e = ex.parse("sin(x)^2 + cos(x)^2")
    x = np.linspace(0, 3, 7)
    assert np.allclose(ex.evaluate(e, {"x": x}), 1.0)


def test_symbolic_diff():
    e = ex.parse("x^3*exp(2*x)")
    d = ex.to_callable(ex.diff(e, "x"), "x")
    x = 0.7
    assert d(x) == pytest.approx((3 * x**2 + 2 * x**3) * math.exp(2 * x), rel=1e-14)


def test_free_vars_and_params():
    e = ex.parse("0.5*k*x^2")
    assert ex.free_vars(e) == {"k", "x"}
    assert ex.to_callable(e, "x", k=2.0)(3.0) == pytest.approx(9.0)


@pytest.mark.parametrize("text, offset", [("1 + ", 4), ("(x", 2), ("2 $ 3", 2), ("", 0)])
def test_syntax_error_offsets(text, offset):
    with pytest.raises(ExprSyntaxError) as info:
        ex.parse(text)
    assert info.value.offset == offset


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError) as info:
        ex.parse("x + y", symbols=("x",))
    assert info.value.name == "y" and info.value.offset == 4


@pytest.mark.parametrize("text, binding", [("sqrt(x)", -1.0), ("log(x)", 0.0), ("1/x", 0.0), ("z", None)])
def test_evaluation_faults(text, binding):
    b = {} if binding is None else {"x": binding}
    with pytest.raises(EvaluationError):
        ex.evaluate(ex.parse(text), b)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=200, deadline=None)
def test_print_parse_round_trip(seed):
    e = random_expr(np.random.default_rng(seed))
    text = ex.to_string(e)
    assert ex.to_string(ex.parse(text)) == text
