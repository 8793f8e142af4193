"""Randomized invariant checks shared by the ``props`` command and the tests.

Each check draws its cases from a seeded :class:`numpy.random.Generator`
and returns a :class:`PropResult` with the worst observed error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import expr as ex
from .deform_ops import (
    DeformationParams,
    Func1D,
    conformable_deriv,
    hausdorff_deriv,
    katugampola_deriv,
    measure_integral,
    q_integral,
)
from .errors import EvaluationError
from .q_algebra import q_deriv, q_exp, q_exp_modulus_sq, q_log, q_sum, scale_q_deriv

__all__ = ["PropResult", "smooth_family", "random_expr", "PROPERTIES", "run_props", "OPERATOR_KINDS"]


@dataclass
class PropResult:
    name: str
    passed: bool
    worst: float
    tol: float
    cases: int

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: worst={self.worst:.3e} tol={self.tol:.0e} cases={self.cases}"


# smooth test functions with analytic derivatives ---------------------------


def smooth_family(rng: np.random.Generator) -> Func1D:
    """A random smooth ``Func1D`` with an analytic derivative."""
    k = int(rng.integers(5))
    a, b, c = rng.uniform(-1.5, 1.5, size=3)
    if k == 0:
        return Func1D(lambda x: math.sin(a * x + b), lambda x: a * math.cos(a * x + b))
    if k == 1:
        return Func1D(lambda x: math.exp(0.5 * a * x), lambda x: 0.5 * a * math.exp(0.5 * a * x))
    if k == 2:
        return Func1D(lambda x: a + b * x + c * x * x, lambda x: b + 2 * c * x)
    if k == 3:
        return Func1D(lambda x: math.log(1 + x * x), lambda x: 2 * x / (1 + x * x))
    return Func1D(lambda x: 1.0 / (1.0 + abs(a) * x * x), lambda x: -2 * abs(a) * x / (1.0 + abs(a) * x * x) ** 2)


def _product(f: Func1D, g: Func1D) -> Func1D:
    return Func1D(lambda x: f(x) * g(x), lambda x: f.deriv(x) * g(x) + f(x) * g.deriv(x))


def _compose(f: Func1D, g: Func1D) -> Func1D:
    return Func1D(lambda x: f(g(x)), lambda x: f.deriv(g(x)) * g.deriv(x))


OPERATOR_KINDS = ("conformable", "katugampola", "hausdorff", "q_deriv", "scale_q")


def _random_operator(rng, kind: str):
    """``(params, D(f, x))`` for a random parameter draw of ``kind``."""
    if kind == "conformable":
        a = float(rng.uniform(0.1, 1.0))
        return DeformationParams.conformable(a), lambda f, x, mode="kernel": conformable_deriv(f, x, a, mode)
    if kind == "katugampola":
        a = float(rng.uniform(0.1, 1.0))
        return DeformationParams.katugampola(a), lambda f, x, mode="kernel": katugampola_deriv(f, x, a, mode)
    if kind == "hausdorff":
        z, l0 = float(rng.uniform(0.1, 1.0)), float(rng.uniform(0.5, 3.0))
        return DeformationParams.hausdorff(z, l0), lambda f, x, mode="kernel": hausdorff_deriv(f, x, z, l0, mode)
    if kind == "q_deriv":
        q = float(rng.uniform(0.5, 1.3))
        return DeformationParams.q_deriv(q), lambda f, x, mode="kernel": q_deriv(f, x, q, mode)
    q, lam = float(rng.uniform(0.5, 1.3)), float(rng.uniform(0.2, 1.0))
    return DeformationParams.scale_q(q, lam), lambda f, x, mode="kernel": scale_q_deriv(f, x, q, lam)


def _rel(err, *scales):
    return abs(err) / max(1.0, *(abs(s) for s in scales))


def check_leibniz(rng, cases: int = 100) -> PropResult:
    worst = 0.0
    for i in range(cases):
        kind = OPERATOR_KINDS[i % len(OPERATOR_KINDS)]
        _, D = _random_operator(rng, kind)
        f, g = smooth_family(rng), smooth_family(rng)
        x = float(rng.uniform(0.2, 3.0))
        lhs = D(_product(f, g), x)
        a, b = g(x) * D(f, x), f(x) * D(g, x)
        worst = max(worst, _rel(lhs - a - b, lhs, a, b))
    return PropResult("leibniz rule", worst <= 1e-8, worst, 1e-8, cases)


def check_chain(rng, cases: int = 100) -> PropResult:
    worst = 0.0
    for i in range(cases):
        kind = OPERATOR_KINDS[i % len(OPERATOR_KINDS)]
        _, D = _random_operator(rng, kind)
        f, g = smooth_family(rng), smooth_family(rng)
        x = float(rng.uniform(0.2, 3.0))
        lhs = D(_compose(f, g), x)
        rhs = f.deriv(g(x)) * D(g, x)
        worst = max(worst, _rel(lhs - rhs, lhs, rhs))
    return PropResult("chain rule", worst <= 1e-8, worst, 1e-8, cases)


def check_integration_by_parts(rng, cases: int = 100) -> PropResult:
    """``int f Dg dmu = [fg] - int g Df dmu`` with ``dmu = dx/K`` (the dual measure)."""
    worst = 0.0
    for i in range(cases):
        kind = OPERATOR_KINDS[i % len(OPERATOR_KINDS)]
        p, D = _random_operator(rng, kind)
        f, g = smooth_family(rng), smooth_family(rng)
        a = float(rng.uniform(0.2, 1.5))
        b = a + float(rng.uniform(0.2, 1.5))
        if kind == "q_deriv":
            lhs = q_integral(lambda x: f(x) * D(g, x), a, b, p.q)
            rhs = f(b) * g(b) - f(a) * g(a) - q_integral(lambda x: g(x) * D(f, x), a, b, p.q)
        else:
            lhs = measure_integral(lambda x: f(x) * D(g, x), a, b, p)
            rhs = f(b) * g(b) - f(a) * g(a) - measure_integral(lambda x: g(x) * D(f, x), a, b, p)
        worst = max(worst, _rel(lhs - rhs, lhs, rhs))
    return PropResult("integration by parts", worst <= 1e-6, worst, 1e-6, cases)


def check_mode_agreement(rng, cases: int = 100) -> PropResult:
    """Kernel form against limit definition (no analytic derivative used)."""
    worst = 0.0
    kinds = ("conformable", "katugampola", "hausdorff", "q_deriv")
    for i in range(cases):
        kind = kinds[i % len(kinds)]
        _, D = _random_operator(rng, kind)
        f = smooth_family(rng)
        x = float(rng.uniform(0.2, 3.0))
        k = D(f, x, "kernel")
        lim = D(Func1D(f._f), x, "limit")
        worst = max(worst, abs(k - lim) / max(abs(k), 1e-3))
    return PropResult("kernel/limit agreement", worst <= 1e-6, worst, 1e-6, cases)


def check_katugampola_vs_conformable(rng, cases: int = 60) -> PropResult:
    worst = 0.0
    for _ in range(cases):
        a = float(rng.uniform(0.1, 1.0))
        f = smooth_family(rng)
        x = float(rng.uniform(0.2, 3.0))
        c = conformable_deriv(f, x, a)
        kt = katugampola_deriv(Func1D(f._f), x, a, "limit")
        worst = max(worst, abs(c - kt) / max(abs(c), 1e-3))
    return PropResult("katugampola = conformable", worst <= 1e-6, worst, 1e-6, cases)


def check_classical_limits(rng, cases: int = 60) -> PropResult:
    worst = 0.0
    for _ in range(cases):
        f = smooth_family(rng)
        x = float(rng.uniform(0.2, 3.0))
        d = f.deriv(x)
        for val in (
            conformable_deriv(f, x, 1.0),
            katugampola_deriv(f, x, 1.0, "kernel"),
            hausdorff_deriv(f, x, 1.0, float(rng.uniform(0.5, 3.0))),
            q_deriv(f, x, 1.0),
            scale_q_deriv(f, x, 1.0, float(rng.uniform(0.2, 2.0))),
        ):
            worst = max(worst, _rel(val - d, d))
    return PropResult("classical limits", worst <= 1e-8, worst, 1e-8, cases)


def check_q_eigenfunction(rng=None, qs=None, xs_per_q: int = 25) -> PropResult:
    qs = [0.2, 0.4, 0.6, 0.8, 1.2, 1.4, 1.6, 1.8] if qs is None else qs
    worst, n = 0.0, 0
    for q in qs:
        # support: 1 + (1-q) x > 0; stay well inside it
        hi = 3.0 if q < 1 else min(3.0, 0.8 / (q - 1))
        lo = -0.8 / (1 - q) if q < 1 else -3.0
        lo = max(lo, -3.0)
        for x in np.linspace(lo, hi, xs_per_q):
            f = Func1D(lambda s, q=q: q_exp(s, q), lambda s, q=q: q_exp(s, q) ** q)
            val = q_deriv(f, float(x), q)
            worst = max(worst, abs(val - q_exp(float(x), q)) / max(1.0, abs(q_exp(float(x), q))))
            n += 1
    return PropResult("q-exponential eigenfunction", worst <= 1e-10, worst, 1e-10, n)


def check_q_algebra(rng, cases: int = 200) -> PropResult:
    worst = 0.0
    for _ in range(cases):
        q = float(rng.uniform(0.2, 1.8))
        if abs(q - 1) < 1e-3:
            continue
        lim = 0.9 / abs(1 - q)
        # keep x, y and x (+)_q y inside the support
        sign = 1.0 if q < 1 else -1.0
        x, y = (sign * float(v) for v in rng.uniform(0.0, 0.45 * lim, size=2))
        worst = max(worst, abs(q_log(q_exp(x, q), q) - x) / max(1.0, abs(x)))
        lhs = q_exp(x, q) * q_exp(y, q)
        worst = max(worst, abs(lhs - q_exp(q_sum(x, y, q), q)) / max(1.0, abs(lhs)))
        m = abs(q_exp(1j * x, q)) ** 2
        worst = max(worst, abs(m - q_exp_modulus_sq(x, q)) / max(1.0, m))
    return PropResult("q-algebra laws", worst <= 1e-10, worst, 1e-10, cases)


_LEAVES = ("x", "y")
_OPS = ("+", "-", "*", "/", "^")


def random_expr(rng, depth: int = 3) -> ex.Expr:
    """Random expression over ``x, y`` with the full grammar."""
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.5:
            return ex.Var(_LEAVES[int(rng.integers(2))])
        return ex.Const(float(np.round(rng.uniform(0.1, 5.0), 3)))
    r = rng.random()
    if r < 0.15:
        return ex.Neg(random_expr(rng, depth - 1))
    if r < 0.35:
        return ex.Call(ex.FUNCTIONS[int(rng.integers(len(ex.FUNCTIONS)))], random_expr(rng, depth - 1))
    op = _OPS[int(rng.integers(len(_OPS)))]
    if op == "^":
        return ex.Binary("^", random_expr(rng, depth - 1), ex.Const(float(rng.integers(0, 4))))
    return ex.Binary(op, random_expr(rng, depth - 1), random_expr(rng, depth - 1))


def check_expr_roundtrip(rng, cases: int = 1000) -> PropResult:
    bad, tried = 0, 0
    for _ in range(cases):
        e = random_expr(rng)
        b = {"x": float(rng.uniform(0.1, 2.0)), "y": float(rng.uniform(0.1, 2.0))}
        try:
            v = ex.evaluate(e, b)
        except EvaluationError:
            continue
        tried += 1
        v2 = ex.evaluate(ex.parse(ex.to_string(e)), b)
        if not (v == v2 or (math.isnan(v) and math.isnan(v2))):
            bad += 1
    return PropResult("expr print/parse round trip", bad == 0, float(bad), 0.0, tried)


def check_expr_diff(rng, cases: int = 300) -> PropResult:
    worst, n = 0.0, 0
    h = 1e-5
    for _ in range(cases):
        e = random_expr(rng)
        de = ex.diff(e, "x")
        x, y = float(rng.uniform(0.3, 2.0)), float(rng.uniform(0.3, 2.0))
        try:
            vals = [ex.evaluate(e, {"x": x + s, "y": y}) for s in (-2 * h, -h, h, 2 * h)]
            d = ex.evaluate(de, {"x": x, "y": y})
        except EvaluationError:
            continue
        fd = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)
        if not all(math.isfinite(v) for v in vals + [d]) or max(abs(v) for v in vals) > 1e6:
            continue
        n += 1
        worst = max(worst, abs(d - fd) / max(1.0, abs(d)))
    return PropResult("symbolic diff vs finite differences", worst <= 1e-6, worst, 1e-6, n)


def check_opt_equivalence(rng, cases: int = 10) -> PropResult:
    from .euler_lagrange import Trajectory, el_residual
    from .lagrangian import MechLagrangian

    bad = 0
    for _ in range(cases):
        a = float(rng.uniform(0.3, 1.0))
        k = float(rng.uniform(0.1, 2.0))
        t = np.linspace(0.5, 2.0, 200)
        x = np.sin(t) + float(rng.uniform(-1, 1)) * t**2
        tr = Trajectory(t, x)
        r1 = el_residual(tr, MechLagrangian(1.0, f"{k!r}*x^2/2", DeformationParams.conformable(a), "opt1"))
        r2 = el_residual(tr, MechLagrangian(1.0, f"{k!r}*x^2/2", DeformationParams.conformable(a), "opt2"))
        bad += int(not np.array_equal(r1, r2))
    return PropResult("opt1/opt2 residuals identical", bad == 0, float(bad), 0.0, cases)


def check_legendre(rng, cases: int = 200) -> PropResult:
    from .hamiltonian import inverse_legendre, legendre
    from .lagrangian import MechLagrangian

    worst = 0.0
    L = MechLagrangian(float(rng.uniform(0.5, 3.0)), "0.5*x^2 + 0.1*x^4")
    for _ in range(cases):
        t, x, v = (float(s) for s in rng.uniform(-2, 2, size=3))
        p, H = legendre(L, t, x, v)
        worst = max(worst, abs(H + L(t, x, v) - p * v) / max(1.0, abs(H)))
        v2, Lv = inverse_legendre(L, t, x, p)
        worst = max(worst, abs(v2 - v), abs(Lv - L(t, x, v)) / max(1.0, abs(Lv)))
    return PropResult("Legendre identity and involution", worst <= 1e-12, worst, 1e-12, cases)


def check_weighted_self_adjoint(rng, cases: int = 6) -> PropResult:
    from .lagrangian import FieldLagrangian
    from .schrodinger import spatial_deformed_hamiltonian

    worst = 0.0
    for i in range(cases):
        x = np.linspace(float(rng.uniform(0.2, 1.0)), 10.0, 96)
        if i % 2:
            d = DeformationParams.q_deriv(float(rng.uniform(0.6, 1.0)))
        else:
            d = DeformationParams.conformable(float(rng.uniform(0.3, 1.0)))
        L = FieldLagrangian("spatial_deformed", deform=d)
        worst = max(worst, spatial_deformed_hamiltonian(x, L, 0.1 * x**2).self_adjoint_defect())
    return PropResult("deformed H self-adjoint in weighted product", worst <= 1e-10, worst, 1e-10, cases)


PROPERTIES: dict[str, Callable] = {
    "leibniz": check_leibniz,
    "chain": check_chain,
    "integration_by_parts": check_integration_by_parts,
    "mode_agreement": check_mode_agreement,
    "katugampola": check_katugampola_vs_conformable,
    "classical_limits": check_classical_limits,
    "q_eigenfunction": lambda rng, cases=None: check_q_eigenfunction(rng),
    "q_algebra": check_q_algebra,
    "expr_roundtrip": check_expr_roundtrip,
    "expr_diff": check_expr_diff,
    "opt_equivalence": check_opt_equivalence,
    "legendre": check_legendre,
    "self_adjoint": check_weighted_self_adjoint,
}


def run_props(cases: int | None = None, seed: int = 0, names=None) -> list[PropResult]:
    """Run the registered checks; ``cases`` overrides each check's default count."""
    out = []
    for name, fn in PROPERTIES.items():
        if names is not None and name not in names:
            continue
        rng = np.random.default_rng([seed, len(name)] + [ord(c) for c in name])
        out.append(fn(rng) if cases is None else fn(rng, cases))
    return out
