"""Deformed action functionals and a direct-method minimizer.

Options 1/2 integrate against the deformed measure ``dt / K(t)``, which is
``ds`` in the deformed clock; there the kinetic term is ``m/2 (dx/ds)**2``
and the discretization is the ordinary one on a grid uniform in ``s``
(for the conformable kernel, ``s = t**a / a``, so the measure singularity at
``t = 0`` is absorbed exactly). Option 3 integrates ``m/2 K(t)**2 xdot**2 - V``
against ``dt`` with the kernel sampled at cell midpoints.

The discrete action is ``sum_j m/2 c_j (dx_j)**2 / dsig_j - sum_i w_i V(x_i)``
(cellwise kinetic term, trapezoidal potential term).
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import minimize

from .errors import ConvergenceError, GridError, ParameterError
from .euler_lagrange import Trajectory
from .lagrangian import AnyLagrangian, GenericLagrangian, MechLagrangian, Option

__all__ = ["ActionProblem", "ConvergenceReport", "ActionResult", "deformed_action", "minimize_action"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ActionProblem:
    """Fixed-endpoint problem ``x(t_start) = x_start, x(t_end) = x_end`` on ``n`` nodes."""

    L: AnyLagrangian
    t_start: float
    t_end: float
    x_start: float
    x_end: float
    n: int = 200

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise ParameterError(f"need t_start < t_end, got {self.t_start}, {self.t_end}")
        if self.n < 16:
            raise GridError(f"n must be >= 16, got {self.n}")
        if self.option.deformed_measure and self.t_start < 0:
            raise ParameterError("options 1/2 need t_start >= 0")
        pole = self.L.deform.kernel_pole()
        if pole is not None and self.t_start <= pole <= self.t_end:
            raise ParameterError(f"kernel pole at t = {pole} inside the time window")

    @property
    def option(self) -> Option:
        return self.L.option

    def grid(self) -> np.ndarray:
        """Nodes uniform in the integration variable (clock ``s`` for options 1/2)."""
        d = self.L.deform
        if self.option.deformed_measure:
            s = np.linspace(d.clock(self.t_start), d.clock(self.t_end), self.n)
            t = np.asarray(d.clock_inverse(s), dtype=float)
            t[0], t[-1] = self.t_start, self.t_end
            return t
        return np.linspace(self.t_start, self.t_end, self.n)


@dataclass
class ConvergenceReport:
    converged: bool
    iterations: int
    grad_norm: float
    message: str
    history: list[tuple[int, float, float]] = field(default_factory=list)

    @property
    def monotone(self) -> bool:
        """Descent certificate: recorded actions never increase (to round-off)."""
        acts = np.array([h[1] for h in self.history])
        if len(acts) < 2:
            return True
        tol = 1e-13 * max(1.0, float(np.max(np.abs(acts))))
        return bool(np.all(np.diff(acts) <= tol))

    def rows(self):
        return [("iteration", "action", "grad_norm")] + [(i, a, g) for i, a, g in self.history]


@dataclass
class ActionResult:
    trajectory: Trajectory
    action: float
    report: ConvergenceReport


class _Discrete:
    """Discrete action on a fixed node set; interior nodes are the unknowns."""

    def __init__(self, L: AnyLagrangian, t: np.ndarray):
        self.L = L
        self.t = t
        d = L.deform
        if L.option.deformed_measure:
            self.sig = np.asarray(d.clock(t), dtype=float)
            self.c = np.ones(len(t) - 1)
        else:
            self.sig = t
            tm = 0.5 * (t[1:] + t[:-1])
            self.c = np.asarray(d.kernel(tm), dtype=float) ** 2
        self.dsig = np.diff(self.sig)
        if np.any(self.dsig <= 0):
            raise GridError("integration variable is not increasing on the grid")
        w = np.zeros(len(t))
        w[:-1] += 0.5 * self.dsig
        w[1:] += 0.5 * self.dsig
        self.w = w

    def value(self, x: np.ndarray) -> float:
        L = self.L
        dx = np.diff(x)
        if isinstance(L, GenericLagrangian):
            tm = 0.5 * (self.t[1:] + self.t[:-1])
            xm = 0.5 * (x[1:] + x[:-1])
            dax = np.sqrt(self.c) * dx / self.dsig
            vals = np.array([L(a, b, c) for a, b, c in zip(tm, xm, dax)])
            return float(np.sum(vals * self.dsig))
        kin = 0.5 * L.mass * np.sum(self.c * dx * dx / self.dsig)
        return float(kin - np.sum(self.w * L.V(x, self.t)))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        L = self.L
        flux = L.mass * self.c * np.diff(x) / self.dsig
        g = np.zeros_like(x)
        g[1:-1] = flux[:-1] - flux[1:] - self.w[1:-1] * L.dV(x[1:-1], self.t[1:-1])
        return g

    def hessian_banded(self, x: np.ndarray) -> np.ndarray:
        L = self.L
        k = L.mass * self.c / self.dsig
        diag = k[:-1] + k[1:] - self.w[1:-1] * np.atleast_1d(L.d2V(x[1:-1], self.t[1:-1]))
        ab = np.zeros((3, len(diag)))
        ab[0, 1:] = -k[1:-1]
        ab[1] = diag
        ab[2, :-1] = -k[1:-1]
        return ab


def deformed_action(traj: Trajectory, problem: ActionProblem) -> float:
    """Discrete deformed action of ``traj`` for ``problem``'s Lagrangian and option.

    The trajectory must start and end at the problem's endpoints; its nodes
    need not coincide with ``problem.grid()``.
    """
    t, x = traj.t, traj.x
    scale = max(1.0, abs(problem.t_end))
    xs = max(1.0, abs(problem.x_start), abs(problem.x_end))
    if abs(t[0] - problem.t_start) > 1e-12 * scale or abs(t[-1] - problem.t_end) > 1e-12 * scale:
        raise ParameterError("trajectory time span does not match the problem")
    if abs(x[0] - problem.x_start) > 1e-12 * xs or abs(x[-1] - problem.x_end) > 1e-12 * xs:
        raise ParameterError("trajectory endpoints do not match the problem")
    return _Discrete(problem.L, t).value(x)


def _newton_polish(D: _Discrete, x: np.ndarray, gtol: float, history, it0: int, max_steps: int = 50):
    it = it0
    for _ in range(max_steps):
        g = D.gradient(x)
        gn = float(np.max(np.abs(g[1:-1])))
        if gn <= gtol:
            break
        step = solve_banded((1, 1), D.hessian_banded(x), -g[1:-1])
        f0 = D.value(x)
        lam = 1.0
        while lam > 1e-8:
            trial = x.copy()
            trial[1:-1] += lam * step
            if D.value(trial) <= f0 + 1e-14 * max(1.0, abs(f0)):
                break
            lam *= 0.5
        else:
            break
        x = trial
        it += 1
        history.append((it, D.value(x), float(np.max(np.abs(D.gradient(x)[1:-1])))))
    return x, it


def minimize_action(
    problem: ActionProblem,
    gtol: float = 1e-9,
    x_init=None,
    max_iter: int | None = None,
    starts: int = 1,
    seed: int | None = None,
    raise_on_failure: bool = False,
) -> ActionResult:
    """Minimize the discrete action over interior node values.

    Quasi-Newton (L-BFGS) descent with the analytic gradient of the discrete
    action, finished by Newton steps on its tridiagonal Hessian. Converged
    when the gradient infinity-norm is ``<= gtol``; the iteration cap is
    ``10 n**2``. The initial guess is the straight line between the
    endpoints; ``starts > 1`` adds seeded random perturbations of it and
    keeps the lowest action (ties go to the straight-line start).
    """
    L = problem.L
    if not isinstance(L, MechLagrangian):
        raise ParameterError("minimize_action supports MechLagrangian (quadratic kinetic term)")
    t = problem.grid()
    D = _Discrete(L, t)
    n = problem.n
    max_iter = 10 * n * n if max_iter is None else max_iter
    line = problem.x_start + (problem.x_end - problem.x_start) * (D.sig - D.sig[0]) / (D.sig[-1] - D.sig[0])
    guesses = [line if x_init is None else np.asarray(x_init, dtype=float)]
    rng = np.random.default_rng(seed)
    amp = 0.1 * max(1.0, abs(problem.x_end - problem.x_start))
    for _ in range(starts - 1):
        g = line.copy()
        g[1:-1] += amp * rng.standard_normal(n - 2)
        guesses.append(g)

    best = None
    for guess in guesses:
        res = _minimize_from(D, guess, problem, gtol, max_iter)
        if best is None or res.action < best.action - 1e-12 * max(1.0, abs(best.action)):
            best = res
    if not best.report.converged:
        msg = f"action minimization stopped with gradient norm {best.report.grad_norm:.3e} > {gtol:.1e}"
        if raise_on_failure:
            raise ConvergenceError(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return best


def _minimize_from(D: _Discrete, x0: np.ndarray, problem: ActionProblem, gtol: float, max_iter: int) -> ActionResult:
    x = x0.copy()
    x[0], x[-1] = problem.x_start, problem.x_end
    history: list[tuple[int, float, float]] = []

    def full(z):
        x[1:-1] = z
        return x

    def fun(z):
        xx = full(z)
        return D.value(xx), D.gradient(xx)[1:-1]

    def callback(intermediate_result):
        z = intermediate_result.x
        xx = full(z)
        history.append((len(history) + 1, D.value(xx), float(np.max(np.abs(D.gradient(xx)[1:-1])))))

    xx = full(x[1:-1].copy())
    history.append((0, D.value(xx), float(np.max(np.abs(D.gradient(xx)[1:-1])))))
    res = minimize(
        fun,
        x[1:-1].copy(),
        jac=True,
        method="L-BFGS-B",
        callback=callback,
        options={"maxiter": max_iter, "gtol": gtol, "ftol": 0.0, "maxcor": 20},
    )
    x = full(res.x)
    x, it = _newton_polish(D, x.copy(), gtol, history, history[-1][0])
    gn = float(np.max(np.abs(D.gradient(x)[1:-1])))
    converged = gn <= gtol
    msg = str(res.message) + ("" if it == history[-1][0] else "; Newton polish applied")
    log.debug("action minimization: %s, |g|=%.3e", msg, gn)
    report = ConvergenceReport(converged, history[-1][0], gn, msg, history)
    traj = Trajectory(t=D.t, x=x.copy(), columns={"clock": D.sig})
    return ActionResult(traj, D.value(x), report)
