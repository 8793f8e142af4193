"""Noether currents and their deformed divergence.

For a symmetry ``delta phi`` with boundary term ``G``, the current is
``J^mu = dL/d(D_mu phi) delta phi - G^mu`` and on solutions
``D_t J^0 + D_x J^1 = 0`` with ``D = K d/d(.)`` per axis.

For the Schrödinger density
``L = i hbar psi* D_t psi - hbar**2/(2m) |D_x psi|**2 - V |psi|**2``
(``psi`` and ``psi*`` varied independently) the phase symmetry
``delta psi = i psi`` gives ``J^0 = -hbar |psi|**2`` and
``J^1 = -(hbar**2/m) Im(psi* D_x psi)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .deform_ops import DeformationParams
from .errors import GridError, ParameterError
from .lagrangian import FieldLagrangian, FieldVariant
from .schrodinger import Evolution, WaveFunction, first_derivative, spatial_deformed_hamiltonian, standard_hamiltonian

__all__ = [
    "SymmetryVariation",
    "RealFieldDensity",
    "NoetherCurrent",
    "phase_symmetry",
    "shift_symmetry",
    "noether_current",
    "deformed_divergence",
    "charge",
    "schrodinger_current",
    "evolution_currents",
]

RESIDUAL_WARN = 1e-6


@dataclass(frozen=True)
class SymmetryVariation:
    """``delta_phi(phi) -> delta phi``; ``G`` is ``(G0, G1)`` callables of ``(x, t)`` or ``None``."""

    delta_phi: Callable[[np.ndarray], np.ndarray]
    G: tuple | None = None

    def boundary(self, x, t):
        if self.G is None:
            return 0.0, 0.0
        return tuple(np.asarray(g(x, t)) * np.ones_like(x) for g in self.G)


def phase_symmetry() -> SymmetryVariation:
    return SymmetryVariation(lambda psi: 1j * np.asarray(psi))


def shift_symmetry(c: float = 1.0) -> SymmetryVariation:
    return SymmetryVariation(lambda phi: np.full(np.shape(phi), c, dtype=float))


@dataclass(frozen=True)
class RealFieldDensity:
    """Real scalar density ``L(phi, D_t phi, D_x phi)`` given as a callable.

    Partials with respect to the derivative slots are central differences.
    """

    func: Callable
    deform_t: DeformationParams = field(default_factory=DeformationParams)
    deform_x: DeformationParams = field(default_factory=DeformationParams)
    h: float = 1e-6

    def partial(self, slot: int, phi, dt_phi, dx_phi):
        args = [np.asarray(phi, dtype=float), np.asarray(dt_phi, dtype=float), np.asarray(dx_phi, dtype=float)]
        up = list(args)
        dn = list(args)
        up[slot] = args[slot] + self.h
        dn[slot] = args[slot] - self.h
        return (self.func(*up) - self.func(*dn)) / (2 * self.h)


@dataclass
class NoetherCurrent:
    x: np.ndarray
    t: float
    J0: np.ndarray
    J1: np.ndarray
    warnings: list[str] = field(default_factory=list)


def _dx_matrix_apply(wf: WaveFunction, d: DeformationParams) -> np.ndarray:
    """``D_x psi`` on all nodes (fourth-order interior, one-sided at the ends)."""
    x, psi = wf.x, wf.psi
    out = np.gradient(psi, x, edge_order=2)
    out[1:-1] = first_derivative(len(x), wf.dx) @ psi[1:-1]
    return np.asarray(d.kernel(x), dtype=float) * out


def schrodinger_current(psi: np.ndarray, x: np.ndarray, hbar: float, mass: float, deform_x: DeformationParams | None = None):
    """``(J0, J1)`` of the phase symmetry from sampled ``psi`` (second-order ``d/dx``)."""
    psi = np.asarray(psi, dtype=complex)
    dpsi = np.gradient(psi, x, axis=-1, edge_order=2)
    if deform_x is not None:
        dpsi = dpsi * np.asarray(deform_x.kernel(x), dtype=float)
    return -hbar * np.abs(psi) ** 2, -(hbar * hbar / mass) * np.imag(np.conj(psi) * dpsi)


def _schrodinger_residual(wf: WaveFunction, L: FieldLagrangian, t: float, dpsi_dt) -> float:
    x = wf.x
    V = np.asarray(L.V(x, t), dtype=float) * np.ones_like(x)
    if L.variant is FieldVariant.SPATIAL_DEFORMED:
        Hm = spatial_deformed_hamiltonian(x, L, V)
        Kt = 1.0
    else:
        Hm = standard_hamiltonian(x, L.mass, L.hbar, V)
        Kt = float(L.deform.kernel(t)) if L.variant is FieldVariant.TIME_DEFORMED else 1.0
    lhs = 1j * L.hbar * Kt * np.asarray(dpsi_dt)[1:-1]
    r = lhs - Hm.apply(wf.psi[1:-1])
    return float(np.max(np.abs(r)) / max(1.0, float(np.max(np.abs(lhs)))))


def noether_current(
    L_density,
    snapshot,
    sym: SymmetryVariation,
    t: float = 0.0,
    dphi_dt=None,
    x=None,
) -> NoetherCurrent:
    """``J^mu = dL/d(D_mu phi) delta phi - G^mu`` at every grid point.

    ``L_density`` is a :class:`FieldLagrangian` (``snapshot`` a
    :class:`WaveFunction`) or a :class:`RealFieldDensity` (``snapshot`` a real
    array on ``x``; ``dphi_dt`` required). If ``dphi_dt`` is given for a
    Schrödinger snapshot, its field-equation residual is checked and a warning
    is attached when it exceeds ``1e-6`` (relative).
    """
    notes: list[str] = []
    if isinstance(L_density, FieldLagrangian):
        wf: WaveFunction = snapshot
        x = wf.x
        dx_deform = L_density.deform if L_density.variant is FieldVariant.SPATIAL_DEFORMED else DeformationParams()
        psi = wf.psi
        dpsi = _dx_matrix_apply(wf, dx_deform)
        dphi = np.asarray(sym.delta_phi(psi), dtype=complex)
        dphi_c = np.conj(dphi)
        hb, m = L_density.hbar, L_density.mass
        # psi and psi* as independent fields
        J0 = (1j * hb * np.conj(psi)) * dphi
        J1 = -(hb * hb / (2 * m)) * (np.conj(dpsi) * dphi + dpsi * dphi_c)
        if np.max(np.abs(J0.imag)) > 1e-12 * max(1.0, np.max(np.abs(J0))) or np.max(np.abs(J1.imag)) > 1e-12 * max(1.0, np.max(np.abs(J1))):
            notes.append("current has an imaginary part; the variation is not a real symmetry")
        J0, J1 = J0.real, J1.real
        if dphi_dt is not None:
            res = _schrodinger_residual(wf, L_density, t, dphi_dt)
            if res > RESIDUAL_WARN:
                notes.append(f"snapshot field-equation residual {res:.3e} exceeds {RESIDUAL_WARN:.0e}")
    elif isinstance(L_density, RealFieldDensity):
        if x is None or dphi_dt is None:
            raise ParameterError("a real field density needs x and dphi_dt")
        x = np.asarray(x, dtype=float)
        phi = np.asarray(snapshot, dtype=float)
        if phi.shape != x.shape:
            raise GridError("field and grid shapes differ")
        Dt = float(L_density.deform_t.kernel(t)) * np.asarray(dphi_dt, dtype=float)
        Dx = np.asarray(L_density.deform_x.kernel(x), dtype=float) * np.gradient(phi, x, edge_order=2)
        dphi = np.asarray(sym.delta_phi(phi), dtype=float)
        J0 = L_density.partial(1, phi, Dt, Dx) * dphi
        J1 = L_density.partial(2, phi, Dt, Dx) * dphi
    else:
        raise ParameterError(f"unsupported density type {type(L_density).__name__}")
    G0, G1 = sym.boundary(x, t)
    return NoetherCurrent(x, t, J0 - G0, J1 - G1, notes)


def deformed_divergence(
    J0: np.ndarray,
    J1: np.ndarray,
    t: np.ndarray,
    x: np.ndarray,
    deform_t: DeformationParams | None = None,
    deform_x: DeformationParams | None = None,
    time_coordinate: str = "t",
) -> np.ndarray:
    """``K_t(t) dJ0/dt + K_x(x) dJ1/dx`` on a ``(len(t), len(x))`` grid.

    Second-order differences (``numpy.gradient``). With
    ``time_coordinate="clock"`` the rows of ``t`` are clock values ``tau`` and
    ``D_t = d/dtau``.
    """
    J0 = np.asarray(J0, dtype=float)
    J1 = np.asarray(J1, dtype=float)
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if J0.shape != (len(t), len(x)) or J1.shape != J0.shape:
        raise GridError("currents must have shape (len(t), len(x))")
    if len(t) < 3 or len(x) < 3:
        raise GridError("need at least 3 points per axis")
    dJ0 = np.gradient(J0, t, axis=0, edge_order=2)
    dJ1 = np.gradient(J1, x, axis=1, edge_order=2)
    if time_coordinate == "t" and deform_t is not None:
        dJ0 = dJ0 * np.asarray(deform_t.kernel(t), dtype=float)[:, None]
    elif time_coordinate not in ("t", "clock"):
        raise ParameterError(f"time_coordinate must be 't' or 'clock', got {time_coordinate!r}")
    if deform_x is not None:
        dJ1 = dJ1 * np.asarray(deform_x.kernel(x), dtype=float)[None, :]
    return dJ0 + dJ1


def charge(J0: np.ndarray, x: np.ndarray, weight: np.ndarray | None = None) -> np.ndarray:
    """``Q = sum J0 w dx`` per row (``weight`` defaults to ones)."""
    J0 = np.atleast_2d(J0)
    w = np.ones(J0.shape[-1]) if weight is None else np.asarray(weight)
    return np.sum(J0 * w, axis=-1) * (x[1] - x[0])


def evolution_currents(evo: Evolution, L: FieldLagrangian):
    """Phase currents on every snapshot of ``evo``.

    Returns ``(J0, J1, Q, divergence)`` where ``divergence`` uses the
    snapshot times (the clock ``tau`` for time-deformed runs, so ``D_t = d/dtau``).
    """
    dx_deform = L.deform if L.variant is FieldVariant.SPATIAL_DEFORMED else None
    J0, J1 = schrodinger_current(evo.psi, evo.x, L.hbar, L.mass, dx_deform)
    if L.variant is FieldVariant.TIME_DEFORMED:
        tt = np.asarray(L.deform.clock(evo.t), dtype=float)
        div = deformed_divergence(J0, J1, tt, evo.x, None, dx_deform, time_coordinate="clock")
    else:
        div = deformed_divergence(J0, J1, evo.t, evo.x, None, dx_deform)
    Q = charge(J0, evo.x, evo.weight if dx_deform is not None else None)
    return J0, J1, Q, div
