"""Deformed Euler-Lagrange residuals evaluated on sampled trajectories.

Derivatives along the trajectory are second-order finite differences
(:func:`numpy.gradient`, non-uniform spacing allowed). Options 1 and 2 take
the outer derivative in the deformed clock ``s`` (where ``D = d/ds``);
option 3 takes it in ordinary time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import expr as ex
from .deform_ops import DeformationParams, Kind
from .errors import DomainError, GridError, ParameterError
from .lagrangian import AnyLagrangian, MechLagrangian, Option

__all__ = [
    "Trajectory",
    "MixedLagrangian",
    "el_residual",
    "el_residual_opt12",
    "el_residual_opt3",
    "el_residual_q",
    "el_residual_classical",
    "el_residual_mixed",
]

MIN_POINTS_PER_PERIOD = 50


@dataclass(frozen=True)
class Trajectory:
    """A sampled path ``x(t)``.

    ``v`` is the ordinary velocity ``dx/dt`` when known (otherwise residuals
    difference ``x``). ``grid_kind="shifted"`` marks grids in the variable
    ``1 + t'/l0``, which must be >= 1. ``columns`` carries extra per-sample
    diagnostics (first integrals, residuals) for CSV export.
    """

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray | None = None
    grid_kind: str = "raw"
    columns: Mapping[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        x = np.asarray(self.x, dtype=float)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "x", x)
        if t.ndim != 1 or t.shape != x.shape:
            raise GridError("t and x must be 1-D arrays of equal length")
        if np.any(np.diff(t) <= 0):
            raise GridError("time grid must be strictly increasing")
        if self.v is not None:
            v = np.asarray(self.v, dtype=float)
            if v.shape != t.shape:
                raise GridError("v must match t in length")
            object.__setattr__(self, "v", v)
        if self.grid_kind not in ("raw", "shifted"):
            raise ParameterError(f"grid_kind must be 'raw' or 'shifted', got {self.grid_kind!r}")
        if self.grid_kind == "shifted" and t[0] < 1.0:
            raise GridError("shifted grids must satisfy t >= 1")
        object.__setattr__(self, "columns", {k: np.asarray(c) for k, c in dict(self.columns).items()})

    def __len__(self):
        return len(self.t)

    @classmethod
    def from_function(cls, t, x_of_t, v_of_t=None, **kw) -> "Trajectory":
        t = np.asarray(t, dtype=float)
        v = None if v_of_t is None else v_of_t(t)
        return cls(t, x_of_t(t), v, **kw)

    def velocity(self) -> np.ndarray:
        return self.v if self.v is not None else np.gradient(self.x, self.t, edge_order=2)


def _check_resolution(traj: Trajectory, L: AnyLagrangian, s: np.ndarray):
    if len(traj) < 5:
        raise GridError(f"trajectory has {len(traj)} points; at least 5 are needed")
    if not isinstance(L, MechLagrangian) or L.is_free:
        return
    curv = np.abs(np.atleast_1d(L.d2V(traj.x, traj.t)))
    wmax = math.sqrt(float(np.max(curv)) / L.mass)
    if wmax == 0.0:
        return
    period = 2.0 * math.pi / wmax
    ds = float(np.max(np.diff(s)))
    if ds > period / MIN_POINTS_PER_PERIOD:
        raise GridError(
            f"grid too coarse: spacing {ds:.3g} in the deformed clock exceeds "
            f"1/{MIN_POINTS_PER_PERIOD} of the characteristic period {period:.3g}"
        )


def _deformed_velocity(traj: Trajectory, d: DeformationParams, s: np.ndarray) -> np.ndarray:
    if traj.v is not None:
        return d.kernel(traj.t) * traj.v
    return np.gradient(traj.x, s, edge_order=2)


def _interior(r: np.ndarray, interior: bool) -> np.ndarray:
    return r[1:-1] if interior else r


def el_residual_opt12(traj: Trajectory, L: AnyLagrangian, interior: bool = True) -> np.ndarray:
    """``dL/dx - D(dL/d(Dx))`` for options 1 and 2 (identical by construction).

    Returns interior points unless ``interior=False``; end values then come
    from one-sided stencils.
    """
    d = L.deform
    s = np.asarray(d.clock(traj.t), dtype=float)
    if np.any(np.diff(s) <= 0):
        raise DomainError("deformed clock is not increasing on this grid (kernel sign change?)")
    _check_resolution(traj, L, s)
    dax = _deformed_velocity(traj, d, s)
    p = np.asarray(L.dL_ddax(traj.t, traj.x, dax), dtype=float)
    r = np.asarray(L.dL_dx(traj.t, traj.x, dax), dtype=float) - np.gradient(p, s, edge_order=2)
    return _interior(r, interior)


def _check_raw_origin(traj: Trajectory, d: DeformationParams):
    singular = d.kind in (Kind.CONFORMABLE, Kind.KATUGAMPOLA) and d.alpha < 1.0
    if singular and traj.grid_kind == "raw" and traj.t[0] <= 0.0:
        raise DomainError(
            "option-3 residual needs t > 0 on a raw grid; use the shifted variable 1 + t'/l0 to reach t' = 0"
        )


def el_residual_opt3(traj: Trajectory, L: AnyLagrangian, interior: bool = True) -> np.ndarray:
    """``dL/dx - d/dt(K(t) dL/d(Dx))``, with ``K = t**(1-alpha)`` for the
    conformable kind."""
    d = L.deform
    _check_raw_origin(traj, d)
    pole = d.kernel_pole()
    if pole is not None and traj.t[0] <= pole <= traj.t[-1]:
        raise DomainError(f"kernel pole at t = {pole} lies on the grid")
    s = np.asarray(d.clock(traj.t), dtype=float)
    _check_resolution(traj, L, s)
    K = d.kernel(traj.t)
    dax = K * traj.velocity()
    p = np.asarray(L.dL_ddax(traj.t, traj.x, dax), dtype=float)
    r = np.asarray(L.dL_dx(traj.t, traj.x, dax), dtype=float) - np.gradient(K * p, traj.t, edge_order=2)
    return _interior(r, interior)


def el_residual_q(traj: Trajectory, L: AnyLagrangian, interior: bool = True) -> np.ndarray:
    """q-derivative residual ``dL/dx - l0 d/dt[(1 + (1-q) t) dL/d(D_q x)]``.

    The deformed velocity is ``D_q x = l0 (1 + (1-q) t) dx/dt``; for the
    quadratic Lagrangian the free part expands to
    ``2 l0**2 (1-q) m k xdot + l0**2 k**2 m xddot`` with ``k = 1 + (1-q) t``.
    """
    if L.deform.kind is not Kind.Q_DERIV:
        raise ParameterError(f"el_residual_q needs a q_deriv deformation, got {L.deform.kind.value}")
    return el_residual_opt3(traj, L, interior)


def el_residual_classical(traj: Trajectory, L: AnyLagrangian, interior: bool = True) -> np.ndarray:
    """Undeformed residual ``dL/dx - d/dt(dL/dxdot)``, same stencils."""
    v = traj.velocity()
    p = np.asarray(L.dL_ddax(traj.t, traj.x, v), dtype=float)
    r = np.asarray(L.dL_dx(traj.t, traj.x, v), dtype=float) - np.gradient(p, traj.t, edge_order=2)
    return _interior(r, interior)


def el_residual(traj: Trajectory, L: AnyLagrangian, interior: bool = True) -> np.ndarray:
    """Dispatch on ``L.option`` (and the q kind for option 3)."""
    if L.option is Option.OPT3:
        if L.deform.kind is Kind.Q_DERIV:
            return el_residual_q(traj, L, interior)
        return el_residual_opt3(traj, L, interior)
    return el_residual_opt12(traj, L, interior)


# ---------------------------------------------------------------------------
# mixed orders
# ---------------------------------------------------------------------------

MIXED_SYMBOLS = ("x", "y", "Day", "Dby", "z", "Dgz")


@dataclass(frozen=True)
class MixedLagrangian:
    """``L(x, y, D^alpha y, D^beta y, z, D^gamma z)`` as an expression in the
    names ``x, y, Day, Dby, z, Dgz`` (conformable derivatives).

    ``extra_terms=False`` drops the ``(alpha - beta) x**-beta`` and
    ``(alpha - gamma) x**-gamma`` corrections, for sensitivity studies.
    """

    expr: ex.Expr
    alpha: float
    beta: float
    gamma: float | None = None
    params: Mapping[str, float] = field(default_factory=dict)
    extra_terms: bool = True

    def __post_init__(self):
        e = self.expr if isinstance(self.expr, ex.Expr) else ex.parse(str(self.expr))
        object.__setattr__(self, "expr", e)
        object.__setattr__(self, "params", dict(self.params))
        for name in ("alpha", "beta") + (("gamma",) if self.gamma is not None else ()):
            val = getattr(self, name)
            if not (0.0 < val <= 1.0):
                raise ParameterError(f"{name} must lie in (0, 1], got {val}")
        unbound = ex.free_vars(e) - set(MIXED_SYMBOLS) - set(self.params)
        if unbound:
            raise ParameterError(f"mixed Lagrangian uses unbound names {sorted(unbound)}")
        object.__setattr__(self, "_partials", {v: ex.diff(e, v) for v in ("y", "Day", "Dby", "z", "Dgz")})

    @property
    def has_z(self) -> bool:
        return bool({"z", "Dgz"} & ex.free_vars(self.expr))

    def partial(self, name: str, bindings) -> np.ndarray:
        val = ex.evaluate(self._partials[name], {**self.params, **bindings})
        return np.broadcast_to(np.asarray(val, dtype=float), bindings["x"].shape).copy()


def _conf(x, a, f):
    return x ** (1.0 - a) * np.gradient(f, x, edge_order=2)


def el_residual_mixed(x, y, L: MixedLagrangian, z=None, interior: bool = True) -> dict[str, np.ndarray]:
    """Residuals of the mixed-order equations on the grid ``x``.

    y-equation: ``L_y - D^a(L_Day) - D^b(L_Dby) - L_Dby (a - b) x**-b``;
    z-equation: ``L_z - D^g(L_Dgz) - L_Dgz (a - g) x**-g``. The correction
    terms are applied exactly as stated; set ``L.extra_terms=False`` to drop
    them. The result has key ``"z"`` only when the Lagrangian involves ``z``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(np.diff(x) <= 0):
        raise GridError("x grid must be strictly increasing")
    a, b, g = L.alpha, L.beta, L.gamma
    uses_z = L.has_z
    if uses_z and (z is None or g is None):
        raise ParameterError("Lagrangian depends on z: pass z samples and gamma")
    if x[0] <= 0.0:
        if L.extra_terms and (b < a or (uses_z and g < a)):
            raise DomainError("x = 0 on the grid makes the x**-beta correction singular")
        if min(a, b, g if uses_z else 1.0) < 1.0:
            raise DomainError("conformable kernels need x > 0 on the grid")
    bind = {"x": x, "y": y, "Day": _conf(x, a, y), "Dby": _conf(x, b, y)}
    if uses_z:
        z = np.asarray(z, dtype=float)
        bind.update(z=z, Dgz=_conf(x, g, z))
    else:
        bind.update(z=np.zeros_like(x), Dgz=np.zeros_like(x))
    Pa = L.partial("Day", bind)
    Pb = L.partial("Dby", bind)
    ry = L.partial("y", bind) - _conf(x, a, Pa) - _conf(x, b, Pb)
    if L.extra_terms:
        ry = ry - Pb * (a - b) * x ** (-b)
    out = {"y": _interior(ry, interior)}
    if uses_z:
        Pg = L.partial("Dgz", bind)
        rz = L.partial("z", bind) - _conf(x, g, Pg)
        if L.extra_terms:
            rz = rz - Pg * (a - g) * x ** (-g)
        out["z"] = _interior(rz, interior)
    return out
