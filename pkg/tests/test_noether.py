from __future__ import annotations

import numpy as np
import pytest

from metriclag.deform_ops import DeformationParams
from metriclag.errors import GridError
from metriclag.lagrangian import FieldLagrangian
from metriclag.noether import (
    RealFieldDensity,
    charge,
    deformed_divergence,
    evolution_currents,
    noether_current,
    phase_symmetry,
    schrodinger_current,
    shift_symmetry,
)
from metriclag.schrodinger import WaveFunction, gaussian, solve_spatial_deformed, solve_time_deformed

X = np.linspace(-20, 20, 801)


def test_phase_current_of_normalized_state():
    # DERIVED: J0 = -hbar |psi|**2 integrates to -hbar; a plane-wave packet carries J1 = -hbar**2 k0 |psi|**2 / m
    psi = gaussian(X, 0.0, 1.0, 1.5)
    J0, J1 = schrodinger_current(psi, X, 1.0, 1.0)
    assert charge(J0, X)[0] == pytest.approx(-1.0, rel=1e-10)
    assert np.allclose(J1, -1.5 * np.abs(psi) ** 2, atol=1e-3)


def test_noether_current_matches_closed_form():
    wf = WaveFunction(X, gaussian(X, 0.0, 1.0, 0.7))
    L = FieldLagrangian("time_deformed")
    cur = noether_current(L, wf, phase_symmetry())
    J0, J1 = schrodinger_current(wf.psi, X, 1.0, 1.0)
    assert np.allclose(cur.J0, J0)
    assert np.max(np.abs(cur.J1 - J1)) < 1e-3
    assert not cur.warnings


def test_off_shell_snapshot_warns():
    wf = WaveFunction(X, gaussian(X))
    cur = noether_current(FieldLagrangian("time_deformed"), wf, phase_symmetry(), dphi_dt=np.zeros_like(X))
    assert any("residual" in w for w in cur.warnings)


def test_real_field_shift_symmetry():
    # free massless field L = (phi_t**2 - phi_x**2)/2, delta phi = 1: J = (phi_t, -phi_x)
    dens = RealFieldDensity(lambda p, dt, dx: 0.5 * (dt**2 - dx**2))
    x = np.linspace(0, 1, 101)
    phi = np.sin(2 * x)
    cur = noether_current(dens, phi, shift_symmetry(), dphi_dt=np.cos(x), x=x)
    assert np.allclose(cur.J0, np.cos(x), atol=1e-8)
    assert np.allclose(cur.J1[5:-5], -2 * np.cos(2 * x[5:-5]), atol=1e-3)


def test_charge_conserved_along_evolutions():
    L = FieldLagrangian("time_deformed", potential="0.05*x^2", deform=DeformationParams.conformable(0.5))
    evo = solve_time_deformed(WaveFunction(X, gaussian(X, 1.0, 1.0, 1.0)), L, 2.0, 400)
    _, _, Q, div = evolution_currents(evo, L)
    assert np.ptp(Q) < 1e-12
    x = np.linspace(0.5, 20.5, 401)
    Ls = FieldLagrangian("spatial_deformed", deform=DeformationParams.conformable(0.7))
    evo = solve_spatial_deformed(WaveFunction.on_grid(x, gaussian(x, 10.0, 1.0, 1.0), Ls.deform).normalized(), Ls, 1.0, 200)
    _, _, Q, _ = evolution_currents(evo, Ls)
    assert np.ptp(Q) < 1e-12


def test_divergence_shape_validation():
    with pytest.raises(GridError):
        deformed_divergence(np.zeros((3, 4)), np.zeros((3, 4)), np.arange(3.0), np.arange(5.0))
