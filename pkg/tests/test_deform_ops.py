from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metriclag.deform_ops import (
    DeformationParams,
    Func1D,
    conformable_deriv,
    deformed_integral,
    hausdorff_deriv,
    katugampola_deriv,
    matched_q,
    q_integral,
)
from metriclag.errors import DomainError, ParameterError, RangeError

# DERIVED: D^a t**p = p t**(p-a) for the conformable operator
POWER = Func1D(lambda t: t**2, lambda t: 2 * t)


def test_conformable_of_t_squared_at_4():
    assert conformable_deriv(POWER, 4.0, 0.5) == pytest.approx(16.0, rel=1e-14)
    assert conformable_deriv(POWER, 4.0, 0.5, "limit") == pytest.approx(16.0, rel=1e-8)


@given(st.floats(0.2, 1.0), st.floats(0.3, 5.0), st.floats(0.5, 3.0))
@settings(max_examples=60, deadline=None)
def test_conformable_power_rule(alpha, t, p):
    f = Func1D(lambda s: s**p, lambda s: p * s ** (p - 1))
    assert conformable_deriv(f, t, alpha) == pytest.approx(p * t ** (p - alpha), rel=1e-12)


def test_katugampola_matches_conformable():
    f = Func1D(np.sin, np.cos)
    for a in (0.3, 0.7):
        assert katugampola_deriv(f, 1.7, a) == pytest.approx(conformable_deriv(f, 1.7, a), rel=1e-7)


def test_hausdorff_kernel_and_normalization():
    f = Func1D(np.exp, np.exp)
    k = (1 + 2.0 / 0.5) ** (1 - 0.6)
    assert hausdorff_deriv(f, 2.0, 0.6, 0.5) == pytest.approx(k * math.exp(2.0), rel=1e-12)
    assert hausdorff_deriv(f, 2.0, 0.6, 0.5, normalization="conformable_map") == pytest.approx(
        0.5 * k * math.exp(2.0), rel=1e-12
    )


def test_clock_inverts_and_matches_kernel():
    for d in (
        DeformationParams.conformable(0.4),
        DeformationParams.hausdorff(0.7, 2.0),
        DeformationParams.q_deriv(0.8, 1.5),
        DeformationParams.scale_q(1.2, 0.5),
    ):
        t = np.linspace(0.1, 1.5, 9)
        s = np.asarray(d.clock(t))
        assert np.allclose(d.clock_inverse(s), t, rtol=1e-12)
        ds = np.gradient(s, t, edge_order=2)
        h = 1e-5
        ds = (np.asarray(d.clock(t + h)) - np.asarray(d.clock(t - h))) / (2 * h)
        assert np.allclose(ds, 1.0 / np.asarray(d.kernel(t)), rtol=1e-7)


def test_conformable_clock_closed_form():
    d = DeformationParams.conformable(0.5)
    assert d.clock(4.0) == pytest.approx(4.0)  # t**a / a


def test_deformed_integral_of_one():
    # DERIVED: int_0^T t**(a-1) dt = T**a / a
    assert deformed_integral(lambda t: 1.0, 0.0, 4.0, 0.5) == pytest.approx(4.0, rel=1e-10)


def test_q_integral_inverts_q_derivative_on_constants():
    q = 0.6
    val = q_integral(lambda x: 1.0, 0.0, 2.0, q)
    assert val == pytest.approx(math.log1p((1 - q) * 2.0) / (1 - q), rel=1e-10)


def test_matched_q():
    assert matched_q(0.8, 2.0) == pytest.approx(1 - 0.2 / 2.0)


@pytest.mark.parametrize("bad", [dict(alpha=0.0), dict(alpha=1.5), dict(zeta=-0.1), dict(l0=0.0)])
def test_parameter_validation(bad):
    with pytest.raises(ParameterError):
        DeformationParams(kind="conformable", **bad) if "alpha" in bad else DeformationParams(kind="hausdorff", **bad)


def test_domain_errors():
    with pytest.raises(DomainError):
        conformable_deriv(POWER, -1.0, 0.5)


def test_sampled_function_range():
    grid = np.linspace(0, 1, 41)
    f = Func1D.from_samples(grid, grid**2)
    assert f.deriv(0.5) == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(RangeError):
        f(2.0)


def test_classical_kind_is_identity():
    d = DeformationParams.classical()
    assert d.is_identity and d.kernel(3.0) == 1.0
