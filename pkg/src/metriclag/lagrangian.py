"""Mechanics and field Lagrangians with embedded deformed derivatives."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Mapping, Union

import numpy as np

from . import expr as ex
from .deform_ops import DeformationParams
from .errors import ParameterError

__all__ = [
    "Option",
    "FieldVariant",
    "MechLagrangian",
    "GenericLagrangian",
    "FieldLagrangian",
    "PhysicalParams",
    "eval_mech_L",
    "partials",
]


class Option(str, enum.Enum):
    """Variational recipe.

    ``OPT1``: deformed measure, ordinary variation. ``OPT2``: deformed
    measure, deformed variation. ``OPT3``: ordinary measure. Options 1 and 2
    lead to the same Euler-Lagrange equations.
    """

    OPT1 = "opt1"
    OPT2 = "opt2"
    OPT3 = "opt3"

    @classmethod
    def coerce(cls, value) -> "Option":
        if isinstance(value, int) or (isinstance(value, str) and value.isdigit()):
            return cls(f"opt{int(value)}")
        return cls(value)

    @property
    def deformed_measure(self) -> bool:
        return self is not Option.OPT3


class FieldVariant(str, enum.Enum):
    TIME_DEFORMED = "time_deformed"
    SPATIAL_DEFORMED = "spatial_deformed"
    SCALE_Q_TIME = "scale_q_time"
    NRT_NONLINEAR = "nrt_nonlinear"
    OPT3_SPATIAL = "opt3_spatial"


def _as_expr(potential, symbols=("x", "t")) -> ex.Expr:
    if isinstance(potential, ex.Expr):
        return potential
    if isinstance(potential, (int, float)):
        return ex.Const(float(potential))
    return ex.parse(str(potential))


@dataclass(frozen=True)
class PhysicalParams:
    hbar: float = 1.0
    m: float = 1.0
    k: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "m", "k"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be > 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class MechLagrangian:
    """``L = 1/2 m (D x)**2 - V(x, t)`` with ``D`` set by ``deform``.

    ``potential`` is an expression in ``x`` (and optionally ``t``); any other
    names must be bound in ``params``.
    """

    mass: float = 1.0
    potential: ex.Expr = field(default_factory=lambda: ex.Const(0.0))
    deform: DeformationParams = field(default_factory=DeformationParams)
    option: Option = Option.OPT1
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.mass > 0:
            raise ParameterError(f"mass must be > 0, got {self.mass}")
        object.__setattr__(self, "potential", _as_expr(self.potential))
        object.__setattr__(self, "option", Option.coerce(self.option))
        object.__setattr__(self, "params", dict(self.params))
        unbound = ex.free_vars(self.potential) - {"x", "t"} - set(self.params)
        if unbound:
            raise ParameterError(f"potential uses unbound names {sorted(unbound)}")
        dV = ex.diff(self.potential, "x")
        object.__setattr__(self, "_dV", dV)
        object.__setattr__(self, "_d2V", ex.diff(dV, "x"))
        object.__setattr__(self, "_dVdt", ex.diff(self.potential, "t"))

    def _bind(self, x, t):
        return {**self.params, "x": x, "t": t}

    def V(self, x, t=0.0):
        return _broadcast(ex.evaluate(self.potential, self._bind(x, t)), x)

    def dV(self, x, t=0.0):
        return _broadcast(ex.evaluate(self._dV, self._bind(x, t)), x)

    def d2V(self, x, t=0.0):
        return _broadcast(ex.evaluate(self._d2V, self._bind(x, t)), x)

    @property
    def time_independent(self) -> bool:
        return "t" not in ex.free_vars(self.potential)

    @property
    def is_free(self) -> bool:
        return isinstance(self.potential, ex.Const)

    def __call__(self, t, x, dax):
        return eval_mech_L(self, t, x, dax)

    def dL_dx(self, t, x, dax):
        return -self.dV(x, t)

    def dL_ddax(self, t, x, dax):
        return self.mass * np.asarray(dax, dtype=float) if np.ndim(dax) else self.mass * dax

    def d2L_ddax2(self, t, x, dax):
        return self.mass


def _broadcast(val, like):
    if np.ndim(like) and not np.ndim(val):
        return np.full(np.shape(like), float(val))
    return val


@dataclass(frozen=True)
class GenericLagrangian:
    """Arbitrary ``L(t, x, D x)`` given as a callable.

    Partials are central differences (step ``h``), so identities built on
    them hold to roughly ``h**2`` rather than to round-off.
    """

    func: Callable[[float, float, float], float]
    deform: DeformationParams = field(default_factory=DeformationParams)
    option: Option = Option.OPT1
    h: float = 1e-5

    def __post_init__(self):
        object.__setattr__(self, "option", Option.coerce(self.option))

    def __call__(self, t, x, dax):
        return self.func(t, x, dax)

    def dL_dx(self, t, x, dax):
        h = self.h
        return (self.func(t, x + h, dax) - self.func(t, x - h, dax)) / (2 * h)

    def dL_ddax(self, t, x, dax):
        h = self.h
        return (self.func(t, x, dax + h) - self.func(t, x, dax - h)) / (2 * h)

    def d2L_ddax2(self, t, x, dax):
        h = 1e-4
        return (self.func(t, x, dax + h) - 2 * self.func(t, x, dax) + self.func(t, x, dax - h)) / h**2


AnyLagrangian = Union[MechLagrangian, GenericLagrangian]


def eval_mech_L(L: MechLagrangian, t, x, dax):
    """``1/2 m dax**2 - V(x)`` where ``dax`` is the already-evaluated ``D x``."""
    dax = np.asarray(dax, dtype=float) if np.ndim(dax) else float(dax)
    return 0.5 * L.mass * dax * dax - L.V(x, t)


def partials(L: AnyLagrangian):
    """Return ``(dL/dx, dL/d(Dx))`` as callables of ``(t, x, dax)``."""
    return L.dL_dx, L.dL_ddax


@dataclass(frozen=True)
class FieldLagrangian:
    """Schrödinger-type Lagrangian density
    ``i hbar psi* D_t psi - hbar**2/(2m) |D_x psi|**2 - V |psi|**2``.

    ``variant`` selects which derivative is deformed and hence which
    propagator :mod:`metriclag.schrodinger` builds.
    """

    variant: FieldVariant = FieldVariant.TIME_DEFORMED
    mass: float = 1.0
    potential: ex.Expr = field(default_factory=lambda: ex.Const(0.0))
    hbar: float = 1.0
    deform: DeformationParams = field(default_factory=DeformationParams)
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "variant", FieldVariant(self.variant))
        if not self.hbar > 0:
            raise ParameterError(f"hbar must be > 0, got {self.hbar}")
        if not self.mass > 0:
            raise ParameterError(f"mass must be > 0, got {self.mass}")
        object.__setattr__(self, "potential", _as_expr(self.potential))
        object.__setattr__(self, "params", dict(self.params))

    def V(self, x, t=0.0):
        return _broadcast(ex.evaluate(self.potential, {**self.params, "x": x, "t": t}), x)
