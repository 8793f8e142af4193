from __future__ import annotations

import numpy as np
import pytest

from metriclag.deform_ops import DeformationParams
from metriclag.errors import GridError, ParameterError
from metriclag.lagrangian import FieldLagrangian
from metriclag.schrodinger import (
    WaveFunction,
    eigenstates,
    free_gaussian_exact,
    gaussian,
    kinetic_standard,
    null_potential,
    scale_q_residual,
    solve_nrt_nonlinear,
    solve_opt3_spatial,
    solve_scale_q_time,
    solve_spatial_deformed,
    solve_time_deformed,
    spatial_deformed_hamiltonian,
    standard_hamiltonian,
)

X = np.linspace(-20, 20, 801)


def test_wavefunction_validation():
    with pytest.raises(GridError):
        WaveFunction(np.linspace(0, 1, 10), np.zeros(10))
    x = np.r_[np.linspace(0, 1, 50), np.linspace(1.1, 3, 50)]
    with pytest.raises(GridError):
        WaveFunction(x, np.zeros(100))
    wf = WaveFunction(X, np.ones_like(X))
    assert wf.psi[0] == 0 and wf.psi[-1] == 0


def test_gaussian_is_normalized():
    wf = WaveFunction(X, gaussian(X, 1.0, 0.8, 2.0))
    assert wf.norm() == pytest.approx(1.0, rel=1e-12)


def test_free_gaussian_matches_closed_form():
    L = FieldLagrangian("time_deformed")
    evo = solve_time_deformed(WaveFunction(X, gaussian(X, 0.0, 1.0)), L, 1.0, 1000)
    assert np.max(np.abs(evo.psi[-1] - free_gaussian_exact(X, 1.0, 0.0, 1.0))) < 1e-6
    assert evo.norm_drift < 1e-10


def test_cn_agrees_with_spectral():
    L = FieldLagrangian("time_deformed", potential="0.1*x^2", deform=DeformationParams.conformable(0.6))
    wf = WaveFunction(X, gaussian(X, 1.0, 1.0))
    a = solve_time_deformed(wf, L, 2.0, 2000)
    b = solve_time_deformed(wf, L, 2.0, 2000, method="spectral")
    assert np.max(np.abs(a.psi[-1] - b.psi[-1])) < 1e-6


def test_kinetic_operator_is_fourth_order():
    # DERIVED: ground state of 0.5 x**2 is 0.5; error drops ~16x per halving of h
    errs = []
    for n in (101, 201):
        x = np.linspace(-8, 8, n)
        E, _ = eigenstates(standard_hamiltonian(x, 1.0, 1.0, 0.5 * x**2), x, 1)
        errs.append(abs(E[0] - 0.5))
    assert errs[0] / errs[1] > 12


def test_kinetic_standard_symmetric():
    T = kinetic_standard(101, 0.1).toarray()
    assert np.allclose(T, T.T)


def test_deformed_hamiltonian_self_adjoint_in_weight():
    x = np.linspace(0.5, 10.5, 201)
    L = FieldLagrangian("spatial_deformed", potential="0.1*x", deform=DeformationParams.conformable(0.6))
    Hm = spatial_deformed_hamiltonian(x, L, L.V(x))
    assert Hm.self_adjoint_defect() < 1e-12


def test_spatial_deformed_conserves_weighted_norm():
    x = np.linspace(0.5, 20.5, 401)
    L = FieldLagrangian("spatial_deformed", deform=DeformationParams.conformable(0.7))
    wf = WaveFunction.on_grid(x, gaussian(x, 10.0, 1.0, 1.0), L.deform).normalized()
    evo = solve_spatial_deformed(wf, L, 2.0, 200)
    assert evo.norm_drift < 1e-10
    assert evo.measure != "plain"


def test_scale_q_residual_is_second_order():
    x = np.linspace(-8, 8, 161)
    L = FieldLagrangian("scale_q_time", potential="0.5*x^2", deform=DeformationParams.scale_q(0.7, 1.0))
    wf = WaveFunction(x, gaussian(x, 0.5, 1.0))
    r = [np.max(scale_q_residual(solve_scale_q_time(wf, L, 1.0, n), L)) for n in (50, 100)]
    assert np.log2(r[0] / r[1]) == pytest.approx(2.0, abs=0.2)


def test_scale_q_at_q_one_is_unitary():
    x = np.linspace(-8, 8, 161)
    L = FieldLagrangian("scale_q_time", potential="0.5*x^2", deform=DeformationParams.scale_q(1.0, 1.0))
    evo = solve_scale_q_time(WaveFunction(x, gaussian(x, 0.5, 1.0)), L, 3.0, 30)
    assert evo.norm_drift < 1e-12


def test_nrt_rejects_potential_and_keeps_uniform_state_periodic():
    x = np.linspace(-np.pi, np.pi, 128, endpoint=False)
    L = FieldLagrangian("nrt_nonlinear", deform=DeformationParams.q_deriv(0.8, 1.0))
    wf = WaveFunction(x, np.full(x.shape, 0.5 + 0j), boundary="periodic")
    evo = solve_nrt_nonlinear(wf, L, 1.0, 10)
    # bounded by the step-doubling tolerance (1e-10)
    assert np.max(np.abs(evo.psi[-1] - 0.5)) < 1e-9
    with pytest.raises(ParameterError):
        solve_nrt_nonlinear(wf, FieldLagrangian("nrt_nonlinear", potential="x", deform=L.deform), 1.0, 10)


def test_opt3_null_potential_keeps_state_stationary():
    x = np.linspace(0.5, 10.5, 201)
    L = FieldLagrangian("opt3_spatial", deform=DeformationParams.conformable(0.8))
    wf = WaveFunction(x, gaussian(x, 5.0, 1.0)).normalized()
    V = null_potential(wf, L)
    evo = solve_opt3_spatial(wf, L, 1.0, 100, V=V)
    assert np.max(np.abs(evo.psi[-1] - wf.psi)) < 1e-10


def test_variant_mismatch_and_step_validation():
    wf = WaveFunction(X, gaussian(X))
    with pytest.raises(ParameterError):
        solve_time_deformed(wf, FieldLagrangian("scale_q_time"), 1.0, 100)
    with pytest.raises(ParameterError):
        solve_time_deformed(wf, FieldLagrangian("time_deformed"), 1.0, 4)
