from __future__ import annotations

import numpy as np
import pytest

from metriclag.deform_ops import DeformationParams
from metriclag.dynamics import solve_newton_opt3
from metriclag.errors import DomainError, ParameterError
from metriclag.hamiltonian import PhaseState, hamilton_rhs, integrate_hamilton, inverse_legendre, legendre
from metriclag.lagrangian import GenericLagrangian, MechLagrangian


def test_legendre_round_trip():
    L = MechLagrangian(2.0, "0.5*x^2", DeformationParams.conformable(0.5), 1)
    p, H = legendre(L, 1.0, 0.3, 0.7)
    assert p == pytest.approx(1.4)
    assert H == pytest.approx(0.5 * 2.0 * 0.49 + 0.5 * 0.09)
    dax, _ = inverse_legendre(L, 1.0, 0.3, p)
    assert dax == pytest.approx(0.7)


def test_degenerate_lagrangian_rejected():
    L = GenericLagrangian(lambda t, x, v: v - x)
    with pytest.raises(ParameterError):
        legendre(L, 0.0, 0.0, 1.0)


def test_oscillator_energy_conserved():
    L = MechLagrangian(1.0, "0.5*x^2", DeformationParams.classical(), 1)
    tr = integrate_hamilton(1, L, PhaseState(0.0, 1.0, 0.0), 20.0)
    assert np.ptp(tr.H) < 1e-10
    assert np.allclose(tr.q, np.cos(tr.t), atol=1e-9)
    assert tr.rows()[0] == ("t", "q", "p", "H")


def test_opt3_free_velocity_ratio():
    d = DeformationParams.conformable(0.75)
    L = MechLagrangian(1.0, "0", d, 3)
    tr = integrate_hamilton(3, L, PhaseState(1.0, 0.0, 1.0), 4.0)
    # p = m D_t x = m K xdot
    v = tr.p / np.asarray(d.kernel(tr.t)) / L.mass
    assert v[-1] / v[0] == pytest.approx(0.5, rel=1e-10)


def test_opt3_matches_lagrangian_with_potential():
    d = DeformationParams.conformable(0.5)
    L = MechLagrangian(1.0, "0.5*x^2", d, 3)
    tt = np.linspace(1.0, 3.0, 51)
    lag = solve_newton_opt3(L, 0.2, 0.5, 1.0, 3.0, 1e-12, tt)
    p0, _ = legendre(L, 1.0, 0.2, float(d.kernel(1.0)) * 0.5)
    ph = integrate_hamilton(3, L, PhaseState(1.0, 0.2, float(p0)), 3.0, 1e-12, tt)
    assert np.max(np.abs(ph.q - lag.x)) < 1e-8


def test_rhs_domain_and_state_validation():
    L = MechLagrangian(1.0, "0", DeformationParams.conformable(0.5), 3)
    with pytest.raises(DomainError):
        hamilton_rhs(3, PhaseState(0.0, 0.0, 1.0), L)
    with pytest.raises(ParameterError):
        PhaseState(0.0, float("nan"), 1.0)
