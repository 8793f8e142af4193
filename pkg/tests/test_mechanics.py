from __future__ import annotations

import math
import warnings

import numpy as np
import pytest

from metriclag.action import ActionProblem, deformed_action, minimize_action
from metriclag.deform_ops import DeformationParams
from metriclag.dynamics import solve_newton, solve_newton_opt12, solve_newton_shifted
from metriclag.errors import ConvergenceError, DomainError, GridError, ParameterError
from metriclag.euler_lagrange import Trajectory, el_residual
from metriclag.lagrangian import MechLagrangian, Option


def test_option_coercion():
    assert Option.coerce(3) is Option.OPT3
    assert Option.coerce("opt2") is Option.OPT2
    assert Option.OPT1.deformed_measure and not Option.OPT3.deformed_measure


def test_el_residual_vanishes_on_exact_opt1_solution():
    # DERIVED: free opt1 motion is linear in the clock t**a/a
    L = MechLagrangian(1.0, "0", DeformationParams.conformable(0.5), 1)
    t = np.linspace(0.5, 4.0, 400)
    tr = Trajectory.from_function(t, lambda s: 1.0 + 0.3 * 2 * np.sqrt(s))
    assert np.max(np.abs(el_residual(tr, L))) < 1e-6


def test_el_residual_detects_wrong_path():
    L = MechLagrangian(1.0, "0", DeformationParams.conformable(0.5), 1)
    t = np.linspace(0.5, 4.0, 400)
    tr = Trajectory.from_function(t, lambda s: s**2)
    assert np.max(np.abs(el_residual(tr, L))) > 1e-2


def test_classical_oscillator():
    L = MechLagrangian(1.0, "0.5*k*x^2", DeformationParams.classical(), 1, {"k": 4.0})
    tr = solve_newton(L, 1.0, 0.0, 0.0, 3.0, 1e-12)
    assert np.allclose(tr.x, np.cos(2 * tr.t), atol=1e-9)


def test_opt3_first_integral_is_constant():
    L = MechLagrangian(1.0, "0", DeformationParams.conformable(0.6), 3)
    tr = solve_newton(L, 0.0, 1.0, 1.0, 5.0)
    fi = tr.columns["first_integral"]
    assert np.ptp(fi) < 1e-9


def test_opt3_needs_positive_start():
    L = MechLagrangian(1.0, "0", DeformationParams.conformable(0.6), 3)
    with pytest.raises(DomainError):
        solve_newton(L, 0.0, 1.0, 0.0, 1.0)


def test_shifted_starts_at_zero_and_is_classical_for_alpha_one():
    L = MechLagrangian(1.0, "0.5*x^2", DeformationParams.hausdorff(1.0, 1.0), 3)
    tr = solve_newton_shifted(L, 1.0, 0.0, 2.0, 1e-12)
    assert np.allclose(tr.x, np.cos(tr.t), atol=1e-9)
    assert tr.columns["t_shifted"][0] == 1.0


def test_v0_kind_ordinary_vs_deformed():
    L = MechLagrangian(1.0, "0", DeformationParams.conformable(0.5), 1)
    a = solve_newton_opt12(L, 0.0, 1.0, 1.0, 4.0, v0_kind="deformed")
    b = solve_newton_opt12(L, 0.0, 1.0, 1.0, 4.0, v0_kind="ordinary")
    # at t=1 the kernel is 1, so both initial conditions agree
    assert a.x[-1] == pytest.approx(b.x[-1], rel=1e-10)


def test_bad_mass():
    with pytest.raises(ParameterError):
        MechLagrangian(0.0, "0", DeformationParams.classical(), 1)


# -- direct method ----------------------------------------------------------


def test_minimize_action_oscillator():
    L = MechLagrangian(1.0, "0.5*x^2", DeformationParams.classical(), 1)
    pb = ActionProblem(L, 0.0, 1.0, 0.0, 1.0, 200)
    r = minimize_action(pb)
    assert r.report.converged and r.report.monotone
    assert np.max(np.abs(r.trajectory.x - np.sin(r.trajectory.t) / math.sin(1.0))) < 1e-5
    assert deformed_action(r.trajectory, pb) == pytest.approx(r.action, rel=1e-12)
    header, *rows = r.report.rows()
    assert len(rows) == len(r.report.history) and len(header) == 3


def test_minimize_action_opt1_free_closed_form():
    # DERIVED: x(t) = sqrt(t)/2 joins (0,0) and (4,1) for opt1, a=0.5
    L = MechLagrangian(1.0, "0", DeformationParams.conformable(0.5), 1)
    r = minimize_action(ActionProblem(L, 0.0, 4.0, 0.0, 1.0, 64))
    assert np.max(np.abs(r.trajectory.x - np.sqrt(r.trajectory.t) / 2)) < 1e-12


def test_multistart_is_deterministic():
    L = MechLagrangian(1.0, "0.5*x^2 + 0.1*x^4", DeformationParams.conformable(0.7), 3)
    pb = ActionProblem(L, 1.0, 2.0, 0.0, 1.0, 40)
    a = minimize_action(pb, starts=3, seed=5)
    b = minimize_action(pb, starts=3, seed=5)
    assert np.array_equal(a.trajectory.x, b.trajectory.x)


def test_nonconvergence_is_reported():
    L = MechLagrangian(1.0, "0.5*x^2", DeformationParams.classical(), 1)
    pb = ActionProblem(L, 0.0, 1.0, 0.0, 1.0, 100)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r = minimize_action(pb, gtol=1e-30, max_iter=1)
    assert not r.report.converged
    with pytest.raises(ConvergenceError):
        minimize_action(pb, gtol=1e-30, max_iter=1, raise_on_failure=True)


@pytest.mark.parametrize("args, err", [((1.0, 0.0, 0.0, 1.0, 200), ParameterError), ((0.0, 1.0, 0.0, 1.0, 8), GridError)])
def test_action_problem_validation(args, err):
    L = MechLagrangian(1.0, "0", DeformationParams.classical(), 1)
    with pytest.raises(err):
        ActionProblem(L, *args)


# -- mixed-order equations ----------------------------------------------------


def test_mixed_residual_vanishes_on_clock_solution():
    from metriclag.euler_lagrange import MixedLagrangian, el_residual_mixed

    # DERIVED: L = Day**2/2 gives D^a D^a y = 0, solved by y = x**a / a
    L = MixedLagrangian("0.5*Day^2", alpha=0.6, beta=0.6)
    x = np.linspace(0.5, 3.0, 2001)
    r = el_residual_mixed(x, x**0.6 / 0.6, L)
    # nested second-order differences: O(h**2) inside, one-sided next to the ends
    assert set(r) == {"y"} and np.max(np.abs(r["y"][2:-2])) < 1e-5


def test_mixed_correction_term():
    from metriclag.euler_lagrange import MixedLagrangian, el_residual_mixed

    x = np.linspace(0.5, 3.0, 401)
    y = np.sin(x)
    on = el_residual_mixed(x, y, MixedLagrangian("0.5*Dby^2", alpha=0.8, beta=0.5))["y"]
    off = el_residual_mixed(x, y, MixedLagrangian("0.5*Dby^2", alpha=0.8, beta=0.5, extra_terms=False))["y"]
    Dby = (x ** 0.5 * np.cos(x))[1:-1]
    assert np.allclose(off - on, Dby * 0.3 * x[1:-1] ** -0.5, atol=1e-4)
