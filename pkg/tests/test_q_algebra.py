from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metriclag.deform_ops import Func1D
from metriclag.errors import DomainError
from metriclag.q_algebra import q_deriv, q_exp, q_exp_modulus_sq, q_log, q_sum, scale_q_deriv


def test_q_exp_values():
    # DERIVED: e_0.5(1) = 1.5**2
    assert q_exp(1.0, 0.5) == pytest.approx(2.25)
    assert q_exp(0.3, 1.0) == pytest.approx(math.exp(0.3))
    assert q_exp(0.0, 1.7) == 1.0


def test_q_exp_support():
    with pytest.raises(DomainError):
        q_exp(-3.0, 0.5)
    with pytest.raises(DomainError):
        q_log(0.0, 0.5)


@given(st.floats(0.2, 1.8), st.floats(-0.4, 0.4))
@settings(max_examples=100, deadline=None)
def test_q_log_inverts_q_exp(q, x):
    assert q_log(q_exp(x, q), q) == pytest.approx(x, abs=1e-12)


@given(st.floats(0.3, 1.7), st.floats(0.0, 0.3), st.floats(0.0, 0.3))
@settings(max_examples=100, deadline=None)
def test_q_exp_of_q_sum_factorizes(q, x, y):
    assert q_exp(q_sum(x, y, q), q) == pytest.approx(q_exp(x, q) * q_exp(y, q), rel=1e-12)


def test_complex_modulus_law():
    # DERIVED: |e_q(i x)|**2 = (1 + (1-q)**2 x**2)**(1/(1-q))
    assert abs(q_exp(1j, 0.5)) ** 2 == pytest.approx(1.5625)
    assert q_exp_modulus_sq(1.0, 0.5) == pytest.approx(1.5625)


def test_q_exp_is_eigenfunction():
    q = 0.7
    f = Func1D(lambda x: q_exp(x, q), lambda x: q_exp(x, q) ** q)
    for x in (0.0, 0.5, 1.2):
        assert q_deriv(f, x, q) == pytest.approx(q_exp(x, q), rel=1e-12)
        assert q_deriv(f, x, q, "limit") == pytest.approx(q_exp(x, q), rel=1e-7)


def test_scale_q_reduces_to_classical():
    f = Func1D(np.sin, np.cos)
    assert scale_q_deriv(f, 0.7, 1.0, 3.0) == pytest.approx(math.cos(0.7))


def test_array_input():
    out = q_exp(np.array([0.0, 1.0]), 0.5)
    assert np.allclose(out, [1.0, 2.25])
