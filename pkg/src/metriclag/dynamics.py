"""Integrators for the deformed Newton equations.

All solvers use the Dormand-Prince 5(4) pair of :func:`scipy.integrate.solve_ivp`.

* Options 1/2: ``m D(D x) = -V'(x)``. In the deformed clock ``s`` this is
  exactly ``m x''(s) = -V'(x)``, so the singular kernel at ``t = 0`` never
  reaches the integrator.
* Option 3: ``m d/dt(K(t)**2 xdot) = -V'(x)``; the conformable kernel gives
  ``2(1-a) m t**(1-2a) xdot + m t**(2-2a) xddot = -V'``.
* Shifted time ``t = 1 + t'/l0``: option 3 with the Hausdorff kernel
  ``(1 + t'/l0)**(1-a)``, regular at ``t' = 0``.
* q-derivative: option 3 with ``K = l0 (1 + (1-q) t)``.

The first-order-in-epsilon ("low fractionality") equations are provided
for comparison with the full ones.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.integrate import solve_ivp

from .deform_ops import DeformationParams, Kind
from .errors import DomainError, GridError, IntegrationError, ParameterError
from .euler_lagrange import Trajectory, el_residual, el_residual_opt3
from .lagrangian import MechLagrangian, Option

__all__ = [
    "solve_newton",
    "solve_newton_opt12",
    "solve_newton_opt3",
    "solve_newton_shifted",
    "solve_newton_shifted_linearized",
    "solve_newton_q",
    "solve_newton_q_linearized",
]

DEFAULT_POINTS = 201


def _eval_grid(t0, t1, t_eval):
    if t_eval is None:
        return np.linspace(t0, t1, DEFAULT_POINTS)
    t_eval = np.asarray(t_eval, dtype=float)
    if t_eval[0] < t0 or t_eval[-1] > t1 or np.any(np.diff(t_eval) <= 0):
        raise GridError("t_eval must be increasing and inside [t0, t1]")
    return t_eval


def _integrate(rhs, y0, a, b, tol, eval_pts, to_time=lambda s: s):
    if not tol > 0:
        raise ParameterError(f"tol must be > 0, got {tol}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        sol = solve_ivp(rhs, (a, b), y0, method="RK45", t_eval=eval_pts, rtol=tol, atol=tol * 1e-2)
    if sol.status != 0:
        where = float(to_time(sol.t[-1])) if len(sol.t) else float(to_time(a))
        raise IntegrationError(f"integration failed near t={where:.6g}: {sol.message}", location=where)
    if not np.all(np.isfinite(sol.y)):
        bad = int(np.argmax(~np.all(np.isfinite(sol.y), axis=0)))
        where = float(to_time(sol.t[bad]))
        raise IntegrationError(f"non-finite state near t={where:.6g}", location=where)
    return sol


def _with_residual(traj: Trajectory, L: MechLagrangian, residual_fn) -> Trajectory:
    col = np.full(len(traj), np.nan)
    try:
        col[1:-1] = residual_fn(traj, L)
    except (GridError, DomainError):
        pass
    cols = dict(traj.columns)
    cols["el_residual"] = col
    return Trajectory(traj.t, traj.x, traj.v, traj.grid_kind, cols)


def solve_newton_opt12(
    L: MechLagrangian,
    x0: float,
    v0: float,
    t0: float,
    t1: float,
    tol: float = 1e-10,
    t_eval=None,
    v0_kind: str = "deformed",
) -> Trajectory:
    """Options 1/2: ``m t**(1-a) d/dt(t**(1-a) xdot) = -V'(x)`` (conformable).

    Any kernel in ``L.deform`` works; the equation is integrated as
    ``m x''(s) = -V'`` in the clock ``s(t)``. ``v0`` is ``D x`` at ``t0``
    (``v0_kind="deformed"``) or ``dx/dt`` (``v0_kind="ordinary"``). Since
    ``s`` is regular at the origin, ``t0 = 0`` is accepted.

    Columns: ``dax`` (``D x``), ``first_integral`` (``m (Dx)**2/2 + V``,
    constant for time-independent ``V``) and ``el_residual``.
    """
    d = L.deform
    if t0 < 0 or t1 <= t0:
        raise ParameterError(f"need 0 <= t0 < t1, got t0={t0}, t1={t1}")
    if v0_kind == "ordinary":
        if t0 == 0 and d.kernel(0.0) == 0:
            raise DomainError("ordinary velocity at t0=0 is infinite for this kernel; give D x instead")
        v0 = float(d.kernel(t0)) * v0
    elif v0_kind != "deformed":
        raise ParameterError(f"v0_kind must be 'deformed' or 'ordinary', got {v0_kind!r}")
    m = L.mass
    tt = _eval_grid(t0, t1, t_eval)
    s_eval = np.clip(np.asarray(d.clock(tt), dtype=float), d.clock(t0), d.clock(t1))

    def rhs(s, y):
        t = float(d.clock_inverse(s))
        return [y[1], -float(L.dV(y[0], t)) / m]

    sol = _integrate(rhs, [x0, v0], float(d.clock(t0)), float(d.clock(t1)), tol, s_eval, d.clock_inverse)
    x, w = sol.y
    with np.errstate(divide="ignore", invalid="ignore"):
        v = w / d.kernel(tt)
    energy = 0.5 * m * w * w + L.V(x, tt)
    traj = Trajectory(
        tt,
        x,
        v if np.all(np.isfinite(v)) else None,
        columns={"dax": w, "first_integral": energy},
    )
    return _with_residual(traj, L, el_residual) if L.option is not Option.OPT3 else traj


def _opt3_core(L, d: DeformationParams, x0, v0, t0, t1, tol, t_eval) -> Trajectory:
    m = L.mass
    pole = d.kernel_pole()
    if pole is not None and t0 <= pole <= t1:
        raise DomainError(f"kernel pole at t = {pole} inside [{t0}, {t1}]")
    if float(np.min(d.kernel(np.array([t0, t1])))) <= 0.0:
        raise DomainError("kernel must stay positive on the integration interval")
    tt = _eval_grid(t0, t1, t_eval)

    def rhs(t, y):
        K = float(d.kernel(t))
        return [y[1] / (m * K * K), -float(L.dV(y[0], t))]

    K0 = float(d.kernel(t0))
    sol = _integrate(rhs, [x0, m * K0 * K0 * v0], t0, t1, tol, tt)
    x, P = sol.y
    K = d.kernel(tt)
    v = P / (m * K * K)
    return Trajectory(tt, x, v, columns={"dax": K * v, "first_integral": K * K * v})


def solve_newton_opt3(
    L: MechLagrangian, x0: float, v0: float, t0: float, t1: float, tol: float = 1e-10, t_eval=None
) -> Trajectory:
    """Option 3: ``m d/dt(K**2 xdot) = -V'(x)`` from ``t0`` with ``xdot(t0) = v0``.

    With the conformable kernel, ``t0`` must be positive. The
    ``first_integral`` column is ``K(t)**2 xdot``, constant when ``V = 0``.
    """
    d = L.deform
    if t1 <= t0:
        raise ParameterError(f"need t0 < t1, got t0={t0}, t1={t1}")
    if d.kind in (Kind.CONFORMABLE, Kind.KATUGAMPOLA) and d.alpha < 1 and t0 <= 0:
        raise DomainError("option 3 on the raw time axis needs t0 > 0; use solve_newton_shifted for t' = 0")
    traj = _opt3_core(L, d, x0, v0, t0, t1, tol, t_eval)
    return _with_residual(traj, L, el_residual_opt3)


def _hausdorff_for(L: MechLagrangian) -> MechLagrangian:
    d = L.deform
    alpha = d.alpha if d.kind in (Kind.CONFORMABLE, Kind.KATUGAMPOLA, Kind.CLASSICAL) else d.zeta
    hd = DeformationParams.hausdorff(alpha, d.l0)
    return MechLagrangian(L.mass, L.potential, hd, Option.OPT3, L.params)


def solve_newton_shifted(
    L: MechLagrangian, x0: float, v0: float, t1p: float, tol: float = 1e-10, t_eval=None
) -> Trajectory:
    """Option-3 motion in the shifted time ``t = 1 + t'/l0``, starting at ``t' = 0``.

    Integrates ``m d/dt'[(1 + t'/l0)**(2-2a) x'] = -V'(x)``, i.e.
    ``2(1-a)/l0 m s**(1-2a) x' + m s**(2-2a) x'' = -V'`` with
    ``s = 1 + t'/l0``; ``a`` is ``L.deform.alpha`` and ``l0`` is ``L.deform.l0``.
    The returned grid is ``t'``; column ``t_shifted`` holds ``s``.
    """
    if t1p <= 0:
        raise ParameterError(f"need t1' > 0, got {t1p}")
    Lh = _hausdorff_for(L)
    traj = _opt3_core(Lh, Lh.deform, x0, v0, 0.0, t1p, tol, t_eval)
    cols = dict(traj.columns)
    cols["t_shifted"] = 1.0 + traj.t / Lh.deform.l0
    traj = Trajectory(traj.t, traj.x, traj.v, columns=cols)
    return _with_residual(traj, Lh, el_residual_opt3)


def solve_newton_shifted_linearized(
    L: MechLagrangian, x0: float, v0: float, t1p: float, tol: float = 1e-10, t_eval=None
) -> Trajectory:
    """First order in ``eps = 1 - a`` of :func:`solve_newton_shifted`:
    ``m (1 + 2 eps ln s) x'' + 2 eps m/(l0 s) x' = -V'(x)``."""
    d = L.deform
    eps = 1.0 - (d.alpha if d.kind is not Kind.HAUSDORFF else d.zeta)
    l0, m = d.l0, L.mass
    tt = _eval_grid(0.0, t1p, t_eval)

    def rhs(t, y):
        s = 1.0 + t / l0
        acc = (-float(L.dV(y[0], t)) / m - 2.0 * eps / (l0 * s) * y[1]) / (1.0 + 2.0 * eps * math.log(s))
        return [y[1], acc]

    sol = _integrate(rhs, [x0, v0], 0.0, t1p, tol, tt)
    return Trajectory(tt, sol.y[0], sol.y[1], columns={"t_shifted": 1.0 + tt / l0})


def solve_newton_q(L: MechLagrangian, x0: float, v0: float, t1: float, tol: float = 1e-10, t_eval=None) -> Trajectory:
    """q-derivative motion ``l0**2 m d/dt([1 + (1-q) t]**2 xdot) = -V'(x)`` from ``t = 0``.

    Expanded: ``2 l0**2 (1-q) m k xdot + l0**2 k**2 m xddot = -V'`` with
    ``k = 1 + (1-q) t``. With ``q = 1, l0 = 1`` this is ``m xddot = -V'``.
    The ``first_integral`` column is ``l0**2 k**2 xdot``.
    """
    d = L.deform
    if d.kind is not Kind.Q_DERIV:
        raise ParameterError(f"solve_newton_q needs a q_deriv deformation, got {d.kind.value}")
    if 1.0 + (1.0 - d.q) * t1 <= 0.0:
        raise DomainError(f"kernel 1 + (1-q) t vanishes inside [0, {t1}] (pole at t = {1.0 / (d.q - 1.0)})")
    traj = _opt3_core(L, d, x0, v0, 0.0, t1, tol, t_eval)
    return _with_residual(traj, L, el_residual_opt3)


def solve_newton_q_linearized(
    L: MechLagrangian, x0: float, v0: float, t1: float, tol: float = 1e-10, t_eval=None
) -> Trajectory:
    """First order in ``eps = 1 - q``: ``l0**2 m [2 eps xdot + (1 + 2 eps t) xddot] = -V'``."""
    d = L.deform
    if d.kind is not Kind.Q_DERIV:
        raise ParameterError(f"needs a q_deriv deformation, got {d.kind.value}")
    eps, m, l2 = 1.0 - d.q, L.mass, d.l0**2
    tt = _eval_grid(0.0, t1, t_eval)

    def rhs(t, y):
        acc = (-float(L.dV(y[0], t)) / (m * l2) - 2.0 * eps * y[1]) / (1.0 + 2.0 * eps * t)
        return [y[1], acc]

    sol = _integrate(rhs, [x0, v0], 0.0, t1, tol, tt)
    return Trajectory(tt, sol.y[0], sol.y[1])


def solve_newton(L: MechLagrangian, x0: float, v0: float, t0: float, t1: float, tol: float = 1e-10, t_eval=None, shifted=False):
    """Pick the solver matching ``L.option`` and ``L.deform.kind``."""
    if shifted:
        return solve_newton_shifted(L, x0, v0, t1 - t0, tol, t_eval)
    if L.option is Option.OPT3:
        if L.deform.kind is Kind.Q_DERIV:
            if t0 != 0:
                raise ParameterError("the q-Newton solver starts at t = 0")
            return solve_newton_q(L, x0, v0, t1, tol, t_eval)
        return solve_newton_opt3(L, x0, v0, t0, t1, tol, t_eval)
    return solve_newton_opt12(L, x0, v0, t0, t1, tol, t_eval)
