"""Four deformed Schrödinger equations on one Gaussian packet.

Time deformation only reparameterizes time; spatial deformation acts as a
position-dependent mass and conserves a weighted norm; the scale-q equation
breaks unitarity; the NRT equation is nonlinear but reduces to the linear
one at q = 1.
"""

from __future__ import annotations

import numpy as np

from metriclag.deform_ops import DeformationParams
from metriclag.errors import IntegrationError
from metriclag.lagrangian import FieldLagrangian
from metriclag.schrodinger import (
    WaveFunction,
    gaussian,
    solve_nrt_nonlinear,
    solve_scale_q_time,
    solve_spatial_deformed,
    solve_time_deformed,
)

x = np.linspace(-20, 20, 401)
wf = WaveFunction(x, gaussian(x, 0.0, 1.0, 1.0))

a = solve_time_deformed(wf, FieldLagrangian("time_deformed", deform=DeformationParams.conformable(0.5)), 4.0, 1000)
b = solve_time_deformed(wf, FieldLagrangian("time_deformed"), 4.0, 1000)
print(f"time-deformed alpha=0.5 at t=4 equals classical at t=4: {np.max(np.abs(a.psi[-1] - b.psi[-1])):.1e}")

xs = np.linspace(0.5, 20.5, 401)
Ls = FieldLagrangian("spatial_deformed", deform=DeformationParams.conformable(0.7))
s = solve_spatial_deformed(WaveFunction.on_grid(xs, gaussian(xs, 10.0, 1.0, 1.0), Ls.deform).normalized(), Ls, 3.0, 600)
print(f"spatial deformation: weighted norm drift {s.norm_drift:.1e}; "
      f"packet centre moves {np.sum(xs * np.abs(s.psi[0])**2 * s.weight) * (xs[1]-xs[0]):.2f} -> "
      f"{np.sum(xs * np.abs(s.psi[-1])**2 * s.weight) * (xs[1]-xs[0]):.2f}")

q = solve_scale_q_time(wf, FieldLagrangian("scale_q_time", potential="0.5*x^2", deform=DeformationParams.scale_q(0.7, 1.0)), 2.0, 20)
print("scale-q (q=0.7) norm history:", " ".join(f"{v:.3f}" for v in q.norms[::4]))

# NRT needs psi**nu on the principal branch; start from a real packet
real = WaveFunction(x, gaussian(x, 0.0, 1.0))
nl = solve_nrt_nonlinear(real, FieldLagrangian("nrt_nonlinear", deform=DeformationParams.q_deriv(0.9, 1.0)), 1.0, 10)
lin = solve_time_deformed(real, FieldLagrangian("time_deformed"), 1.0, 10, method="spectral", store_every=1)
print(f"NRT q=0.9 vs linear at t=1: max difference {np.max(np.abs(nl.psi[-1] - lin.psi[-1])):.3f}")

# once the tail phase wraps past pi the principal power jumps, and the solver stops
try:
    solve_nrt_nonlinear(real, FieldLagrangian("nrt_nonlinear", deform=DeformationParams.q_deriv(1.1, 1.0)), 1.0, 10)
except IntegrationError as err:
    print(f"NRT q=1.1 stopped: {err}")
