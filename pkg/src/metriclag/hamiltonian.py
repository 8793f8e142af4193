"""Generalized momentum, Legendre map and Hamilton flows for the three options.

With ``p = dL/d(D x)`` and ``H = p D x - L``:

* options 1/2: ``D x = dH/dp``, ``D p = -dH/dx``;
* option 3: ``D x = dH/dp``, ``dH/dx = -K'(t) p - D p``; for the conformable
  kernel ``-K' = (a - 1) t**(-a)``.

``D = d/ds`` in the deformed clock ``s``, so every flow is integrated in ``s``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import _eval_grid, _integrate
from .errors import DomainError, ParameterError
from .lagrangian import AnyLagrangian, MechLagrangian, Option

__all__ = ["PhaseState", "PhaseTrajectory", "legendre", "inverse_legendre", "hamilton_rhs", "integrate_hamilton"]


@dataclass(frozen=True)
class PhaseState:
    t: float
    q: float
    p: float

    def __post_init__(self):
        if not all(np.isfinite([self.t, self.q, self.p])):
            raise ParameterError("phase state must be finite")


@dataclass
class PhaseTrajectory:
    t: np.ndarray
    q: np.ndarray
    p: np.ndarray
    H: np.ndarray
    option: Option

    def states(self) -> list[PhaseState]:
        return [PhaseState(float(a), float(b), float(c)) for a, b, c in zip(self.t, self.q, self.p)]

    def rows(self):
        return [("t", "q", "p", "H")] + list(zip(self.t, self.q, self.p, self.H))


def legendre(L: AnyLagrangian, t, x, dax):
    """``(p, H)`` with ``p = dL/d(Dx)`` and ``H = p Dx - L``."""
    if isinstance(L, MechLagrangian):
        p = L.mass * dax
        return p, p * p / (2.0 * L.mass) + L.V(x, t)
    if abs(L.d2L_ddax2(t, x, dax)) < 1e-12:
        raise ParameterError("Legendre map is not invertible: d2L/d(Dx)^2 vanishes")
    p = L.dL_ddax(t, x, dax)
    return p, p * dax - L(t, x, dax)


def inverse_legendre(L: MechLagrangian, t, x, p):
    """``(Dx, L)`` from ``p``; inverse of :func:`legendre` for quadratic kinetic terms."""
    if not isinstance(L, MechLagrangian):
        raise ParameterError("inverse_legendre needs a quadratic (MechLagrangian) kinetic term")
    dax = p / L.mass
    H = p * p / (2.0 * L.mass) + L.V(x, t)
    return dax, p * dax - H


def hamilton_rhs(option, state: PhaseState, L: MechLagrangian) -> tuple[float, float]:
    """``(D q, D p)`` at ``state``.

    Options 1 and 2 share one right-hand side.
    """
    option = Option.coerce(option)
    d = L.deform
    dq = state.p / L.mass
    force = -float(L.dV(state.q, state.t))
    if option is not Option.OPT3:
        return dq, force
    if d.kind.value in ("conformable", "katugampola") and d.alpha < 1 and state.t <= 0:
        raise DomainError("option 3 Hamilton flow needs t > 0 on the raw time axis")
    return dq, force - float(d.kernel_prime(state.t)) * state.p


def integrate_hamilton(option, L: MechLagrangian, state0: PhaseState, t1: float, tol: float = 1e-12, t_eval=None) -> PhaseTrajectory:
    """Integrate the Hamilton flow from ``state0`` to ``t1`` in the clock ``s``."""
    option = Option.coerce(option)
    d = L.deform
    t0 = state0.t
    if not t1 > t0:
        raise ParameterError(f"need t1 > t0, got {t0}, {t1}")
    if t0 < 0:
        raise ParameterError("Hamilton flows start at t0 >= 0")
    pole = d.kernel_pole()
    if pole is not None and t0 <= pole <= t1:
        raise DomainError(f"kernel pole at t = {pole} inside [{t0}, {t1}]")
    hamilton_rhs(option, state0, L)  # domain check at the start
    tt = _eval_grid(t0, t1, t_eval)
    s0, s1 = float(d.clock(t0)), float(d.clock(t1))
    s_eval = np.clip(np.asarray(d.clock(tt), dtype=float), s0, s1)

    def rhs(s, y):
        t = float(d.clock_inverse(s))
        return list(hamilton_rhs(option, PhaseState(t, y[0], y[1]), L))

    sol = _integrate(rhs, [state0.q, state0.p], s0, s1, tol, s_eval, d.clock_inverse)
    q, p = sol.y
    H = p * p / (2.0 * L.mass) + L.V(q, tt)
    return PhaseTrajectory(tt, q, p, np.asarray(H, dtype=float), option)
