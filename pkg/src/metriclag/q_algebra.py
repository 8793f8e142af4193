"""Tsallis q-algebra: q-exponential, q-logarithm, deformed difference and
the q and scale-q derivatives.

Complex arguments are ordinary Python/numpy complex numbers; powers use the
principal branch.
"""

from __future__ import annotations

import math

import numpy as np

from .deform_ops import FuncLike, as_func, richardson_limit
from .errors import DomainError, ParameterError

__all__ = [
    "q_exp",
    "q_log",
    "q_difference",
    "q_sum",
    "q_deriv",
    "scale_q_deriv",
    "q_exp_modulus_sq",
]


def q_exp(x, q: float):
    """``e_q(x) = (1 + (1-q) x)**(1/(1-q))``; ``q = 1`` returns ``exp(x)``.

    Works elementwise on arrays. Real arguments must satisfy
    ``1 + (1-q) x > 0``.
    """
    arr = np.asarray(x)
    is_complex = np.iscomplexobj(arr)
    if q == 1.0:
        out = np.exp(arr)
    else:
        base = 1.0 + (1.0 - q) * arr
        if is_complex:
            # principal branch; log1p keeps accuracy as q -> 1
            out = np.exp(np.log1p((1.0 - q) * arr.astype(complex)) / (1.0 - q))
        else:
            if np.any(base <= 0.0):
                bad = np.ravel(arr)[np.argmax(np.ravel(base) <= 0.0)]
                raise DomainError(f"q_exp argument x={bad} outside support 1+(1-q)x > 0 (q={q})")
            out = np.exp(np.log1p((1.0 - q) * arr) / (1.0 - q))
    if out.ndim == 0:
        return complex(out) if is_complex else float(out)
    return out


def q_log(y, q: float):
    """``ln_q(y) = (y**(1-q) - 1)/(1-q)`` for ``y > 0``; ``q = 1`` returns ``ln y``."""
    arr = np.asarray(y, dtype=float)
    if np.any(arr <= 0.0):
        raise DomainError(f"q_log needs y > 0, got {np.ravel(arr)[np.argmax(np.ravel(arr) <= 0.0)]}")
    if q == 1.0:
        out = np.log(arr)
    else:
        out = np.expm1((1.0 - q) * np.log(arr)) / (1.0 - q)
    return float(out) if out.ndim == 0 else out


def q_difference(x: float, y: float, q: float) -> float:
    """Deformed difference ``x (-)_q y = (x - y)/(1 + (1-q) y)``."""
    den = 1.0 + (1.0 - q) * y
    if den == 0.0:
        raise DomainError(f"q_difference has a pole at y = 1/(q-1) = {y}")
    return (x - y) / den


def q_sum(x, y, q: float):
    """``x (+)_q y = x + y + (1-q) x y``, so ``e_q(x) e_q(y) = e_q(x (+)_q y)``."""
    return x + y + (1.0 - q) * x * y


def q_exp_modulus_sq(x: float, q: float) -> float:
    """``|e_q(i x)|**2 = (1 + (1-q)**2 x**2)**(1/(1-q))``."""
    if q == 1.0:
        return 1.0
    return (1.0 + (1.0 - q) ** 2 * x * x) ** (1.0 / (1.0 - q))


def _kernel_check(kern: float, where: float):
    if kern == 0.0:
        raise DomainError(f"q kernel vanishes at x={where}")


def q_deriv(f: FuncLike, x: float, q: float, mode: str = "kernel") -> float:
    """q-derivative ``(1 + (1-q) x) f'(x)``.

    ``mode="limit"`` evaluates ``(f(x) - f(y)) / (x (-)_q y)`` as ``y -> x``.
    """
    kern = 1.0 + (1.0 - q) * x
    _kernel_check(kern, x)
    fn = as_func(f)
    if mode == "kernel":
        return kern * fn.deriv(x)
    if mode != "limit":
        raise ParameterError(f"mode must be 'kernel' or 'limit', got {mode!r}")
    f0 = fn(x)
    step = 1e-3 * max(1.0, abs(x))

    def quotient(d):
        y = x + d
        return (f0 - fn(y)) / q_difference(x, y, q)

    return richardson_limit(quotient, step)


def scale_q_deriv(f: FuncLike, x: float, q: float, lam: float) -> float:
    """Scale-q derivative ``(1 + (1-q) lam x) f'(x)``.

    This is the right-hand side of the defining relation taken at face
    value: ``f`` is differentiated at ``x`` itself, with no rescaling of its
    argument. With ``lam = 1`` it is :func:`q_deriv`, and
    ``f(x) = e_q(lam x)`` is an eigenfunction with eigenvalue ``lam``.
    """
    kern = 1.0 + (1.0 - q) * lam * x
    _kernel_check(kern, x)
    if not math.isfinite(lam):
        raise ParameterError(f"lam must be finite, got {lam}")
    return kern * as_func(f).deriv(x)
