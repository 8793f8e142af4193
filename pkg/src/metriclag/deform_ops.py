"""Local deformed (metric) derivatives and their integrals.

Every operator here is a kernel times the ordinary derivative,
``D f(t) = K(t) f'(t)``, and can be evaluated either from that product
("kernel" mode) or from its limit definition ("limit" mode). The two
modes must agree for smooth functions.

The kernel also defines a *deformed clock* ``s(t) = int dt / K(t)`` with
``D = d/ds``. Mechanics, Hamilton flows and the time-deformed
Schrödinger solver all integrate in that clock variable.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, Union

import numpy as np
from scipy import integrate

from .errors import DomainError, GridError, IntegrationError, ParameterError, RangeError

__all__ = [
    "Kind",
    "DeformationParams",
    "Func1D",
    "as_func",
    "matched_q",
    "conformable_deriv",
    "hausdorff_deriv",
    "katugampola_deriv",
    "deformed_integral",
    "q_integral",
    "measure_integral",
    "bridge_argument",
    "q_bridge_deriv",
    "richardson_derivative",
    "richardson_limit",
    "fornberg_weights",
]


class Kind(str, enum.Enum):
    CLASSICAL = "classical"
    CONFORMABLE = "conformable"
    HAUSDORFF = "hausdorff"
    KATUGAMPOLA = "katugampola"
    Q_DERIV = "q_deriv"
    SCALE_Q = "scale_q"


@dataclass(frozen=True)
class DeformationParams:
    """Which deformed derivative to use, and its parameters.

    Parameters
    ----------
    kind
        One of :class:`Kind` (strings accepted).
    alpha
        Order in (0, 1] for conformable / Katugampola kernels ``t**(1-alpha)``.
    zeta
        Hausdorff scaling exponent in (0, 1].
    l0
        Lower cutoff (> 0). Enters the Hausdorff kernel ``(1 + t/l0)**(1-zeta)``
        and multiplies the q kernel in mechanics, ``l0 * (1 + (1-q) t)``.
    q
        Entropic index for ``q_deriv`` and ``scale_q``; ``q = 1`` is classical.
    lam
        Scale factor of the scale-q derivative.
    normalization
        Hausdorff only. ``"cutoff"`` gives ``(1 + t/l0)**(1-zeta)``;
        ``"conformable_map"`` gives ``l0 * (1 + t/l0)**(1-zeta)``, the form
        obtained from the conformable kernel under ``t -> 1 + t/l0``.
    """

    kind: Kind = Kind.CLASSICAL
    alpha: float = 1.0
    zeta: float = 1.0
    l0: float = 1.0
    q: float = 1.0
    lam: float = 1.0
    normalization: str = "cutoff"

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is Kind.CLASSICAL:
            # identity deformation, whatever the caller passed
            object.__setattr__(self, "alpha", 1.0)
            object.__setattr__(self, "zeta", 1.0)
            object.__setattr__(self, "q", 1.0)
            object.__setattr__(self, "lam", 1.0)
        for name in ("alpha", "zeta"):
            val = getattr(self, name)
            if not (0.0 < val <= 1.0):
                raise ParameterError(f"{name} must lie in (0, 1], got {val}")
        if not self.l0 > 0.0:
            raise ParameterError(f"l0 must be > 0, got {self.l0}")
        if not math.isfinite(self.q):
            raise ParameterError(f"q must be finite, got {self.q}")
        if self.normalization not in ("cutoff", "conformable_map"):
            raise ParameterError(f"unknown Hausdorff normalization {self.normalization!r}")

    # convenience constructors -------------------------------------------------

    @classmethod
    def classical(cls) -> "DeformationParams":
        return cls(Kind.CLASSICAL)

    @classmethod
    def conformable(cls, alpha: float) -> "DeformationParams":
        return cls(Kind.CONFORMABLE, alpha=alpha)

    @classmethod
    def katugampola(cls, alpha: float) -> "DeformationParams":
        return cls(Kind.KATUGAMPOLA, alpha=alpha)

    @classmethod
    def hausdorff(cls, zeta: float, l0: float = 1.0, normalization: str = "cutoff") -> "DeformationParams":
        return cls(Kind.HAUSDORFF, zeta=zeta, l0=l0, normalization=normalization)

    @classmethod
    def q_deriv(cls, q: float, l0: float = 1.0) -> "DeformationParams":
        return cls(Kind.Q_DERIV, q=q, l0=l0)

    @classmethod
    def scale_q(cls, q: float, lam: float) -> "DeformationParams":
        return cls(Kind.SCALE_Q, q=q, lam=lam)

    def replace(self, **changes) -> "DeformationParams":
        return replace(self, **changes)

    @property
    def is_identity(self) -> bool:
        k = self.kind
        if k is Kind.CLASSICAL:
            return True
        if k in (Kind.CONFORMABLE, Kind.KATUGAMPOLA):
            return self.alpha == 1.0
        if k is Kind.HAUSDORFF:
            return self.zeta == 1.0 and self.normalization == "cutoff"
        return self.q == 1.0 and (k is Kind.SCALE_Q or self.l0 == 1.0)

    @property
    def order(self) -> float:
        """The fractional order of the kernel (``zeta`` for Hausdorff)."""
        return self.zeta if self.kind is Kind.HAUSDORFF else self.alpha

    # kernel, its derivative, and the deformed clock ----------------------------

    def _q_rate(self) -> tuple[float, float]:
        # (1 + rate*t) * scale is the q kernel
        if self.kind is Kind.Q_DERIV:
            return 1.0 - self.q, self.l0
        return (1.0 - self.q) * self.lam, 1.0

    def kernel(self, t):
        """``K(t)`` such that ``D f = K f'``."""
        t = np.asarray(t, dtype=float)
        k = self.kind
        if k is Kind.CLASSICAL:
            out = np.ones_like(t)
        elif k in (Kind.CONFORMABLE, Kind.KATUGAMPOLA):
            out = t ** (1.0 - self.alpha)
        elif k is Kind.HAUSDORFF:
            out = (1.0 + t / self.l0) ** (1.0 - self.zeta)
            if self.normalization == "conformable_map":
                out = self.l0 * out
        else:
            rate, scale = self._q_rate()
            out = scale * (1.0 + rate * t)
        return out[()] if out.ndim == 0 else out

    def kernel_prime(self, t):
        """``dK/dt``."""
        t = np.asarray(t, dtype=float)
        k = self.kind
        if k is Kind.CLASSICAL:
            out = np.zeros_like(t)
        elif k in (Kind.CONFORMABLE, Kind.KATUGAMPOLA):
            a = self.alpha
            out = np.zeros_like(t) if a == 1.0 else (1.0 - a) * t ** (-a)
        elif k is Kind.HAUSDORFF:
            z = self.zeta
            out = (1.0 - z) / self.l0 * (1.0 + t / self.l0) ** (-z)
            if self.normalization == "conformable_map":
                out = self.l0 * out
        else:
            rate, scale = self._q_rate()
            out = np.full_like(t, scale * rate)
        return out[()] if out.ndim == 0 else out

    def clock(self, t):
        """Deformed clock ``s(t) = int_0^t dt'/K(t')`` (conformable: ``t**a/a``)."""
        t = np.asarray(t, dtype=float)
        k = self.kind
        if k is Kind.CLASSICAL:
            out = t.copy()
        elif k in (Kind.CONFORMABLE, Kind.KATUGAMPOLA):
            a = self.alpha
            out = t**a / a
        elif k is Kind.HAUSDORFF:
            z, l0 = self.zeta, self.l0
            out = l0 * ((1.0 + t / l0) ** z - 1.0) / z
            if self.normalization == "conformable_map":
                out = out / l0
        else:
            rate, scale = self._q_rate()
            out = t / scale if rate == 0.0 else np.log1p(rate * t) / (rate * scale)
        return out[()] if out.ndim == 0 else out

    def clock_inverse(self, s):
        """Inverse of :meth:`clock`."""
        s = np.asarray(s, dtype=float)
        k = self.kind
        if k is Kind.CLASSICAL:
            out = s.copy()
        elif k in (Kind.CONFORMABLE, Kind.KATUGAMPOLA):
            a = self.alpha
            out = (a * s) ** (1.0 / a)
        elif k is Kind.HAUSDORFF:
            z, l0 = self.zeta, self.l0
            if self.normalization == "conformable_map":
                s = s * l0
            out = l0 * ((1.0 + z * s / l0) ** (1.0 / z) - 1.0)
        else:
            rate, scale = self._q_rate()
            out = s * scale if rate == 0.0 else np.expm1(rate * scale * s) / rate
        return out[()] if out.ndim == 0 else out

    def kernel_pole(self) -> float | None:
        """Zero of the kernel for the q kinds (``None`` otherwise)."""
        if self.kind in (Kind.Q_DERIV, Kind.SCALE_Q):
            rate, _ = self._q_rate()
            return None if rate == 0.0 else -1.0 / rate
        return None


def matched_q(zeta: float, l0: float) -> float:
    """Entropic index matched to a Hausdorff medium: ``1 - (1 - zeta)/l0``."""
    if not l0 > 0:
        raise ParameterError(f"l0 must be > 0, got {l0}")
    if not (0.0 < zeta <= 1.0):
        raise ParameterError(f"zeta must lie in (0, 1], got {zeta}")
    return 1.0 - (1.0 - zeta) / l0


# ---------------------------------------------------------------------------
# numerical differentiation helpers
# ---------------------------------------------------------------------------


def richardson_derivative(f: Callable[[float], float], t: float, h: float | None = None, levels: int = 3) -> float:
    """Central difference at ``t`` with Richardson extrapolation.

    Base step defaults to ``max(1e-4, 1e-4*|t|)``; each level halves it.
    """
    if h is None:
        h = max(1e-4, 1e-4 * abs(t))
    table = []
    for i in range(levels):
        hi = h / 2**i
        row = [(f(t + hi) - f(t - hi)) / (2.0 * hi)]
        for k in range(1, i + 1):
            fac = 4.0**k
            row.append((fac * row[k - 1] - table[i - 1][k - 1]) / (fac - 1.0))
        table.append(row)
    return float(table[-1][-1])


def richardson_limit(g: Callable[[float], float], eps0: float, levels: int = 4) -> float:
    """Extrapolate ``lim_{eps->0} g(eps)`` for ``g`` with an error series in ``eps``."""
    table = []
    for i in range(levels):
        row = [g(eps0 / 2**i)]
        for k in range(1, i + 1):
            fac = 2.0**k
            row.append((fac * row[k - 1] - table[i - 1][k - 1]) / (fac - 1.0))
        table.append(row)
    return float(table[-1][-1])


def fornberg_weights(z: float, x: np.ndarray, m: int) -> np.ndarray:
    """Finite-difference weights at ``z`` on nodes ``x`` for derivatives 0..m.

    Returns an array ``c`` of shape ``(len(x), m+1)``; ``c[:, k] @ f(x)``
    approximates the k-th derivative (B. Fornberg, Math. Comp. 51, 1988).
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = np.zeros((n, m + 1))
    c1 = 1.0
    c4 = x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c


# ---------------------------------------------------------------------------
# Func1D
# ---------------------------------------------------------------------------


class Func1D:
    """A real function of one variable: a callable or samples on a grid.

    Callables may carry an analytic derivative ``df``; otherwise derivatives
    come from Richardson-extrapolated central differences. Sampled functions
    use 5-point (4th-order) stencils in the interior and 3-point one-sided
    stencils next to the ends of the grid.
    """

    def __init__(self, f=None, df=None, *, grid=None, values=None):
        if grid is not None or values is not None:
            if f is not None:
                raise TypeError("give either a callable or samples, not both")
            grid = np.asarray(grid, dtype=float)
            values = np.asarray(values, dtype=float)
            if grid.ndim != 1 or grid.shape != values.shape:
                raise GridError("grid and values must be 1-D arrays of equal length")
            if len(grid) < 3:
                raise GridError("sampled functions need at least 3 points")
            if np.any(np.diff(grid) <= 0):
                raise GridError("grid must be strictly increasing")
        elif f is None:
            raise TypeError("Func1D needs a callable or samples")
        self._f = f
        self._df = df
        self.grid = grid
        self.values = values

    @classmethod
    def from_samples(cls, grid, values) -> "Func1D":
        return cls(grid=grid, values=values)

    @property
    def is_sampled(self) -> bool:
        return self.grid is not None

    @property
    def has_analytic_derivative(self) -> bool:
        return self._df is not None

    def _check_range(self, t: float):
        if not (self.grid[0] <= t <= self.grid[-1]):
            raise RangeError(f"t={t} outside sampled grid [{self.grid[0]}, {self.grid[-1]}]")

    def _stencil(self, t: float) -> np.ndarray:
        g = self.grid
        n = len(g)
        i = int(np.argmin(np.abs(g - t)))
        if n >= 5 and 2 <= i <= n - 3:
            return np.arange(i - 2, i + 3)
        if i < n // 2:
            return np.arange(0, 3)
        return np.arange(n - 3, n)

    def __call__(self, t):
        if self._f is not None:
            return self._f(t)
        if np.ndim(t):
            return np.array([self(ti) for ti in np.asarray(t, dtype=float)])
        t = float(t)
        self._check_range(t)
        idx = self._stencil(t)
        w = fornberg_weights(t, self.grid[idx], 0)[:, 0]
        return float(w @ self.values[idx])

    def deriv(self, t: float) -> float:
        """Ordinary derivative ``f'(t)``."""
        if self._df is not None:
            return self._df(t)
        if self._f is not None:
            return richardson_derivative(self._f, float(t))
        t = float(t)
        self._check_range(t)
        idx = self._stencil(t)
        w = fornberg_weights(t, self.grid[idx], 1)[:, 1]
        return float(w @ self.values[idx])


FuncLike = Union[Func1D, Callable[[float], float]]


def as_func(f: FuncLike, df: Callable | None = None) -> Func1D:
    if isinstance(f, Func1D):
        return f
    return Func1D(f, df)


def _forward_step(t: float) -> float:
    return 1e-3 * max(1.0, abs(t))


def _check_mode(mode: str):
    if mode not in ("kernel", "limit"):
        raise ParameterError(f"mode must be 'kernel' or 'limit', got {mode!r}")


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------


def conformable_deriv(f: FuncLike, t: float, alpha: float, mode: str = "kernel", right_limit: bool = False) -> float:
    """Conformable derivative ``t**(1-alpha) f'(t)``.

    ``mode="limit"`` evaluates ``(f(t + eps t**(1-alpha)) - f(t)) / eps`` and
    extrapolates ``eps -> 0``. At ``t = 0`` the derivative exists only as a
    right limit; pass ``right_limit=True`` to extrapolate it from ``t > 0``.
    """
    _check_mode(mode)
    if not (0.0 < alpha <= 1.0):
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha}")
    if t <= 0.0:
        if t == 0.0 and right_limit:
            return _right_limit(lambda s: conformable_deriv(f, s, alpha, mode))
        raise DomainError(f"conformable derivative needs t > 0, got t={t}")
    fn = as_func(f)
    kern = t ** (1.0 - alpha)
    if mode == "kernel":
        return kern * fn.deriv(t)
    f0 = fn(t)
    eps0 = _forward_step(t) / kern
    return richardson_limit(lambda e: (fn(t + e * kern) - f0) / e, eps0)


def katugampola_deriv(f: FuncLike, t: float, alpha: float, mode: str = "limit", right_limit: bool = False) -> float:
    """Katugampola derivative, ``lim (f(t exp(eps t**-alpha)) - f(t)) / eps``.

    For differentiable ``f`` it equals :func:`conformable_deriv`; ``mode="kernel"``
    uses that product form directly.
    """
    _check_mode(mode)
    if not (0.0 < alpha <= 1.0):
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha}")
    if t <= 0.0:
        if t == 0.0 and right_limit:
            return _right_limit(lambda s: katugampola_deriv(f, s, alpha, mode))
        raise DomainError(f"Katugampola derivative needs t > 0, got t={t}")
    fn = as_func(f)
    if mode == "kernel":
        return t ** (1.0 - alpha) * fn.deriv(t)
    f0 = fn(t)
    rate = t ** (-alpha)
    eps0 = _forward_step(t) / (t * rate)
    return richardson_limit(lambda e: (fn(t * math.exp(e * rate)) - f0) / e, eps0)


def _right_limit(op: Callable[[float], float], t0: float = 1e-3) -> float:
    # polynomial extrapolation of op(t) to t = 0 from t0, t0/2, t0/4, t0/8
    ts = np.array([t0 / 2**i for i in range(4)])
    vals = np.array([op(s) for s in ts])
    w = fornberg_weights(0.0, ts, 0)[:, 0]
    return float(w @ vals)


def hausdorff_deriv(
    f: FuncLike,
    x: float,
    zeta: float,
    l0: float,
    mode: str = "kernel",
    normalization: str = "cutoff",
) -> float:
    """Hausdorff derivative on a fractal continuum with lower cutoff ``l0``.

    Kernel form: ``(x/l0 + 1)**(1-zeta) f'(x)``. The limit form is the
    difference quotient against the fractal metric coordinate
    ``ell(x) = l0 ((1 + x/l0)**zeta - 1) / zeta``, i.e.
    ``(f(x') - f(x)) / (ell(x') - ell(x))`` with ``x' -> x``.

    ``normalization="conformable_map"`` multiplies by ``l0``, the constant
    picked up when the conformable kernel is mapped through ``t = 1 + x/l0``.
    """
    _check_mode(mode)
    params = DeformationParams.hausdorff(zeta, l0, normalization)  # validates zeta, l0
    if x < 0.0:
        raise DomainError(f"Hausdorff derivative is defined for x >= 0, got x={x}")
    fn = as_func(f)
    if mode == "kernel":
        return float(params.kernel(x)) * fn.deriv(x)
    ell0 = float(params.clock(x))
    f0 = fn(x)

    def quotient(dx):
        return (fn(x + dx) - f0) / (float(params.clock(x + dx)) - ell0)

    return richardson_limit(quotient, _forward_step(x))


# ---------------------------------------------------------------------------
# integrals
# ---------------------------------------------------------------------------


def _guarded(f: Callable[[float], float], label: str) -> Callable[[float], float]:
    def g(x):
        val = f(x)
        if not math.isfinite(val):
            raise IntegrationError(f"non-finite {label} integrand at x={x}", location=x)
        return val

    return g


def _quad(g, a, b):
    val, _ = integrate.quad(g, a, b, epsabs=1e-13, epsrel=1e-12, limit=400)
    return float(val)


def deformed_integral(f: FuncLike, a: float, b: float, alpha: float) -> float:
    """``int_a^b f(x) x**(alpha-1) dx`` for ``0 <= a < b``.

    For ``alpha < 1`` the weight is absorbed exactly by ``u = x**alpha``:
    the integral becomes ``(1/alpha) int f(u**(1/alpha)) du`` with a smooth
    integrand, so ``a = 0`` needs no special panels.
    """
    if not (0.0 < alpha <= 1.0):
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha}")
    if not (0.0 <= a < b):
        raise DomainError(f"deformed integral needs 0 <= a < b, got a={a}, b={b}")
    fn = as_func(f)
    if alpha == 1.0:
        return _quad(_guarded(fn, "deformed"), a, b)
    inv = 1.0 / alpha

    def g(u):
        x = u**inv
        val = fn(x)
        if not math.isfinite(val):
            if x == 0.0:
                raise IntegrationError("non-finite integrand at the origin", location=0.0)
            raise IntegrationError(f"non-finite deformed integrand at x={x}", location=x)
        return val

    return _quad(g, a**alpha, b**alpha) / alpha


def q_integral(f: FuncLike, a: float, b: float, q: float) -> float:
    """``int_a^b f(x) / (1 + (1-q) x) dx``."""
    if q != 1.0:
        pole = 1.0 / (q - 1.0)
        if min(a, b) <= pole <= max(a, b):
            raise DomainError(f"q-integral kernel has a pole at x = 1/(q-1) = {pole} inside [{a}, {b}]")
    fn = as_func(f)
    return _quad(_guarded(lambda x: fn(x) / (1.0 + (1.0 - q) * x), "q"), a, b)


def measure_integral(f: FuncLike, a: float, b: float, params: DeformationParams) -> float:
    """Integral of ``f`` against the measure ``dx / K(x)`` dual to ``params``.

    Conformable and Katugampola dispatch to :func:`deformed_integral`; the
    q kind with ``l0 = 1`` to :func:`q_integral`.
    """
    k = params.kind
    if k in (Kind.CONFORMABLE, Kind.KATUGAMPOLA):
        return deformed_integral(f, a, b, params.alpha)
    if k is Kind.Q_DERIV and params.l0 == 1.0:
        return q_integral(f, a, b, params.q)
    pole = params.kernel_pole()
    if pole is not None and min(a, b) <= pole <= max(a, b):
        raise DomainError(f"kernel pole at x = {pole} inside [{a}, {b}]")
    fn = as_func(f)
    return _quad(_guarded(lambda x: fn(x) / float(params.kernel(x)), "measure"), a, b)


# ---------------------------------------------------------------------------
# Hausdorff / q bridge
# ---------------------------------------------------------------------------


def bridge_argument(x, l0: float):
    """Log-shifted coordinate ``l0 * ln(1 + x/l0)`` that carries the Hausdorff
    kernel onto the q kernel: with ``1 - q = (1 - zeta)/l0`` the kernels
    ``(1 + x/l0)**(1-zeta)`` and ``1 + (1-q) * l0 ln(1 + x/l0)`` differ at
    second order in ``1 - q``.
    """
    return l0 * np.log1p(np.asarray(x, dtype=float) / l0)


def q_bridge_deriv(f: FuncLike, x: float, q: float, l0: float) -> float:
    """q-kernel derivative of ``f`` at ``x`` with the kernel taken in the
    bridge coordinate: ``(1 + (1-q) l0 ln(1 + x/l0)) f'(x)``."""
    if x < 0.0:
        raise DomainError(f"bridge derivative needs x >= 0, got {x}")
    u = float(bridge_argument(x, l0))
    return (1.0 + (1.0 - q) * u) * as_func(f).deriv(x)
