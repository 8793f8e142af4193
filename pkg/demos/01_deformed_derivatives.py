"""Deformed derivatives side by side.

Every operator here is a kernel times d/dt. Compare conformable,
Katugampola, Hausdorff and q kernels on sin(t), then show how the
Hausdorff and q derivatives approach each other as the deformation vanishes.
"""

from __future__ import annotations

import numpy as np

from metriclag.deform_ops import Func1D, conformable_deriv, hausdorff_deriv, katugampola_deriv, q_bridge_deriv
from metriclag.q_algebra import q_deriv, q_exp

f = Func1D(np.sin, np.cos)

print("t     classical   conformable  katugampola  hausdorff   q-deriv   (alpha=zeta=0.6, q=0.8)")
for t in (0.5, 1.0, 2.0, 3.0):
    print(
        f"{t:<5} {np.cos(t):+.6f}  {conformable_deriv(f, t, 0.6):+.6f}  {katugampola_deriv(f, t, 0.6):+.6f}"
        f"   {hausdorff_deriv(f, t, 0.6, 1.0):+.6f}  {q_deriv(f, t, 0.8):+.6f}"
    )

# the q-exponential is the eigenfunction of the q derivative
q = 0.7
e = Func1D(lambda x: q_exp(x, q))
print("\nD_q e_q(x) - e_q(x), limit mode:", [f"{q_deriv(e, x, q, 'limit') - q_exp(x, q):.1e}" for x in (0.0, 0.5, 1.0)])

# Hausdorff vs q at small deformation: the gap falls like eps**2
print("\neps       |D_q - D_H| at x=1.3")
for eps in (1e-2, 1e-3, 1e-4):
    gap = abs(q_bridge_deriv(f, 1.3, 1 - eps, 1.0) - hausdorff_deriv(f, 1.3, 1 - eps, 1.0))
    print(f"{eps:<8.0e}  {gap:.3e}")
