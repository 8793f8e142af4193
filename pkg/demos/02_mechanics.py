"""Deformed Newton laws, the direct method and Hamilton's equations.

A harmonic oscillator is solved three ways under the conformable
deformation: as an initial value problem, by minimizing the discretized
action between fixed endpoints, and through the Hamiltonian flow.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from metriclag.action import ActionProblem, minimize_action
from metriclag.deform_ops import DeformationParams
from metriclag.dynamics import solve_newton
from metriclag.hamiltonian import PhaseState, integrate_hamilton, legendre
from metriclag.lagrangian import MechLagrangian

# free particle, option 3: velocity decays like t**(-2(1-alpha))
free = MechLagrangian(1.0, "0", DeformationParams.conformable(0.75), option=3)
tr = solve_newton(free, 0.0, 1.0, 1.0, 4.0)
print(f"option 3 free particle: v(4)/v(1) = {tr.velocity()[-1] / tr.velocity()[0]:.12f} (expected 0.5)")

# boundary value problem by the direct method vs shooting on the ODE
L = MechLagrangian(1.0, "0.5*x^2", DeformationParams.conformable(0.5), option=1)
res = minimize_action(ActionProblem(L, 0.0, 2.0, 0.0, 1.0, n=200))
v0 = brentq(lambda v: solve_newton(L, 0.0, v, 0.0, 2.0, 1e-12).x[-1] - 1.0, -10, 10, xtol=1e-14)
ode = solve_newton(L, 0.0, v0, 0.0, 2.0, 1e-12, t_eval=res.trajectory.t)
print(f"direct method: action {res.action:.10f}, {res.report.iterations} iterations, "
      f"max |x_action - x_ode| = {np.max(np.abs(res.trajectory.x - ode.x)):.2e}")

# Hamilton flow from the Legendre transform of the same Lagrangian
p0, H0 = legendre(L, 0.0, 0.4, 0.7)
ph = integrate_hamilton(1, L, PhaseState(0.0, 0.4, float(p0)), 6.0)
print(f"Hamilton flow: H(0) = {H0:.6f}, energy drift over [0, 6] = {np.ptp(ph.H):.1e}")
