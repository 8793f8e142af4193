"""One-dimensional solvers for the deformed Schrödinger equations.

Spatial operators act on interior nodes of a uniform grid with Dirichlet
ends; the boundary is imposed by odd reflection (ghost values ``psi[-k] = -psi[k]``).
The basic building block is the fourth-order staggered difference
``G`` (nodes to cell midpoints, stencil ``(1, -27, 27, -1)/24h``):

* standard kinetic operator: ``d2 = -G^T G``;
* deformed ``(K d/dx)**2 = -K_node G^T K_mid G``, which is self-adjoint for
  the weight ``1/K_node`` (``x**(a-1)`` for the conformable kernel), so
  Crank-Nicolson conserves the weighted norm exactly.

Sign convention: ``i hbar D_t psi = -hbar**2/(2m) d2 psi + V psi``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh
from scipy.sparse.linalg import splu

from . import expr as ex
from .deform_ops import DeformationParams, Kind
from .errors import ConvergenceError, DomainError, GridError, IntegrationError, ParameterError
from .lagrangian import FieldLagrangian, FieldVariant
from .q_algebra import q_exp

__all__ = [
    "WaveFunction",
    "HamiltonianMatrix",
    "Evolution",
    "kinetic_standard",
    "kinetic_deformed",
    "first_derivative",
    "standard_hamiltonian",
    "spatial_deformed_hamiltonian",
    "opt3_spatial_hamiltonian",
    "eigenstates",
    "gaussian",
    "free_gaussian_exact",
    "solve_time_deformed",
    "solve_scale_q_time",
    "solve_nrt_nonlinear",
    "solve_spatial_deformed",
    "solve_opt3_spatial",
    "scale_q_residual",
    "nrt_rhs",
    "nrt_residual",
    "principal_power",
    "null_potential",
    "opt3_coefficients",
]

log = logging.getLogger(__name__)

MIN_POINTS = 64
MIN_STEPS = 8


# --------------------------------------------------------------------------
# wave functions and operators


@dataclass
class WaveFunction:
    """Complex amplitudes on a uniform grid.

    ``weight`` is the node weight of the norm ``sum |psi|**2 w dx``
    (ones for the plain measure, ``1/K(x)`` for deformed measures).
    With ``boundary="dirichlet"`` the grid includes both end points, where
    ``psi`` must vanish; with ``"periodic"`` the right end is omitted.
    """

    x: np.ndarray
    psi: np.ndarray
    measure: str = "plain"
    weight: np.ndarray | None = None
    boundary: str = "dirichlet"

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.psi = np.asarray(self.psi, dtype=complex)
        if self.x.ndim != 1 or self.x.shape != self.psi.shape:
            raise GridError("x and psi must be 1-D arrays of equal length")
        if len(self.x) < MIN_POINTS:
            raise GridError(f"need at least {MIN_POINTS} grid points, got {len(self.x)}")
        dx = np.diff(self.x)
        if np.any(dx <= 0) or np.max(np.abs(dx - dx[0])) > 1e-9 * abs(dx[0]):
            raise GridError("x grid must be uniform and increasing")
        if self.boundary not in ("dirichlet", "periodic"):
            raise ParameterError(f"unknown boundary {self.boundary!r}")
        if self.boundary == "dirichlet":
            self.psi = self.psi.copy()
            self.psi[0] = self.psi[-1] = 0.0
        if self.weight is None:
            self.weight = np.ones_like(self.x)
        self.weight = np.asarray(self.weight, dtype=float)
        if not np.all(np.isfinite(self.psi)):
            raise ParameterError("psi must be finite")

    @classmethod
    def on_grid(cls, x, psi, deform: DeformationParams | None = None, boundary: str = "dirichlet") -> "WaveFunction":
        """Attach the measure implied by ``deform`` (plain when ``None`` or classical)."""
        x = np.asarray(x, dtype=float)
        if deform is None or deform.is_identity:
            return cls(x, psi, "plain", None, boundary)
        _check_kernel_domain(x, deform)
        tag = "q_kernel" if deform.kind in (Kind.Q_DERIV, Kind.SCALE_Q) else "deformed"
        return cls(x, psi, tag, 1.0 / np.asarray(deform.kernel(x), dtype=float), boundary)

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    def norm(self) -> float:
        return float(np.sum(np.abs(self.psi) ** 2 * self.weight) * self.dx)

    def normalized(self) -> "WaveFunction":
        return WaveFunction(self.x, self.psi / math.sqrt(self.norm()), self.measure, self.weight, self.boundary)

    def inner(self, other: "WaveFunction") -> complex:
        return complex(np.sum(np.conj(self.psi) * other.psi * self.weight) * self.dx)

    def interior(self) -> np.ndarray:
        return self.psi[1:-1] if self.boundary == "dirichlet" else self.psi

    def with_interior(self, u: np.ndarray) -> "WaveFunction":
        psi = np.zeros_like(self.psi)
        if self.boundary == "dirichlet":
            psi[1:-1] = u
        else:
            psi[:] = u
        return WaveFunction(self.x, psi, self.measure, self.weight, self.boundary)


def _check_kernel_domain(x, d: DeformationParams):
    if d.kind in (Kind.CONFORMABLE, Kind.KATUGAMPOLA) and d.alpha < 1 and x[0] <= 0:
        raise DomainError(f"x_min must be > 0 for the {d.kind.value} kernel (weight singular at 0), got {x[0]}")
    if d.kind is Kind.HAUSDORFF and x[0] < 0:
        raise DomainError("Hausdorff kernel needs x >= 0")
    K = np.asarray(d.kernel(x), dtype=float)
    if np.any(K <= 0) or not np.all(np.isfinite(K)):
        raise DomainError("deformation kernel must be positive on the grid")


def _ghost_matrix(rows, n_nodes: int, offsets, coeffs, scale: float) -> sp.csr_matrix:
    """Sparse matrix from interior unknowns (nodes 1..N-1) using odd reflection."""
    N = n_nodes - 1
    r, c, v = [], [], []
    for row, base in enumerate(rows):
        for off, w in zip(offsets, coeffs):
            k = base + off
            sign = 1.0
            if k < 0:
                k, sign = -k, -1.0
            elif k > N:
                k, sign = 2 * N - k, -1.0
            if k == 0 or k == N:
                continue
            r.append(row)
            c.append(k - 1)
            v.append(sign * w * scale)
    return sp.csr_matrix((v, (r, c)), shape=(len(rows), N - 1))


def _stagger(n_nodes: int, h: float) -> sp.csr_matrix:
    # midpoint j+1/2 uses nodes j-1, j, j+1, j+2
    return _ghost_matrix(range(n_nodes - 1), n_nodes, (-1, 0, 1, 2), (1.0, -27.0, 27.0, -1.0), 1.0 / (24.0 * h))


def kinetic_standard(n_nodes: int, h: float) -> sp.csr_matrix:
    """Fourth-order ``d2/dx2`` on interior nodes, ``-G^T G`` (symmetric)."""
    G = _stagger(n_nodes, h)
    return (-(G.T @ G)).tocsr()


def kinetic_deformed(x: np.ndarray, d: DeformationParams) -> tuple[sp.csr_matrix, np.ndarray]:
    """``(K d/dx)**2`` as ``-K_node G^T K_mid G`` and the interior weight ``1/K_node``."""
    h = x[1] - x[0]
    G = _stagger(len(x), h)
    Kn = np.asarray(d.kernel(x[1:-1]), dtype=float)
    Km = np.asarray(d.kernel(0.5 * (x[1:] + x[:-1])), dtype=float)
    op = -(sp.diags(Kn) @ G.T @ sp.diags(Km) @ G)
    return op.tocsr(), 1.0 / Kn


def first_derivative(n_nodes: int, h: float) -> sp.csr_matrix:
    """Fourth-order central ``d/dx`` on interior nodes."""
    return _ghost_matrix(range(1, n_nodes - 1), n_nodes, (-2, -1, 1, 2), (1.0, -8.0, 8.0, -1.0), 1.0 / (12.0 * h))


def _periodic_laplacian(n: int, h: float) -> sp.csr_matrix:
    diags = [-1.0, 16.0, -30.0, 16.0, -1.0]
    offs = [-2, -1, 0, 1, 2]
    M = sp.lil_matrix((n, n))
    for i in range(n):
        for o, w in zip(offs, diags):
            M[i, (i + o) % n] += w / (12.0 * h * h)
    return M.tocsr()


@dataclass
class HamiltonianMatrix:
    """Sparse ``H`` on interior nodes.

    ``weight`` is the interior node weight ``w`` of the inner product
    ``<f, g> = sum conj(f) g w dx``; ``hermitian_under`` names that measure
    (``"none"`` when no weight makes ``H`` self-adjoint).
    """

    H: sp.csr_matrix
    weight: np.ndarray
    hermitian_under: str = "plain"

    def apply(self, u: np.ndarray) -> np.ndarray:
        return self.H @ u

    def dense(self) -> np.ndarray:
        return self.H.toarray()

    def self_adjoint_defect(self) -> float:
        """``max |W H - (W H)^H|`` relative to ``max |W H|``."""
        WH = (sp.diags(self.weight) @ self.H).toarray()
        scale = max(1.0, float(np.max(np.abs(WH))))
        return float(np.max(np.abs(WH - WH.conj().T))) / scale


def _potential_values(L: FieldLagrangian, x: np.ndarray, t: float, V) -> np.ndarray:
    if V is not None:
        V = np.asarray(V, dtype=float)
        if V.shape != x.shape:
            raise GridError("potential array must match the grid")
        return V
    return np.asarray(L.V(x, t), dtype=float) * np.ones_like(x)


def _time_dependent(L: FieldLagrangian, V) -> bool:
    return V is None and "t" in ex.free_vars(L.potential)


def standard_hamiltonian(x: np.ndarray, mass: float, hbar: float, V: np.ndarray) -> HamiltonianMatrix:
    """``-hbar**2/(2m) d2 + V`` (Dirichlet)."""
    h = x[1] - x[0]
    T = -(hbar * hbar / (2.0 * mass)) * kinetic_standard(len(x), h)
    return HamiltonianMatrix((T + sp.diags(V[1:-1])).tocsr(), np.ones(len(x) - 2), "plain")


def spatial_deformed_hamiltonian(x: np.ndarray, L: FieldLagrangian, V: np.ndarray) -> HamiltonianMatrix:
    """``-hbar**2/(2m) (K d/dx)**2 + V``, self-adjoint under weight ``1/K``."""
    d = L.deform
    _check_kernel_domain(x, d)
    op, w = kinetic_deformed(x, d)
    H = -(L.hbar**2 / (2.0 * L.mass)) * op + sp.diags(V[1:-1])
    tag = "plain" if d.is_identity else ("q_kernel" if d.kind in (Kind.Q_DERIV, Kind.SCALE_Q) else "deformed")
    return HamiltonianMatrix(H.tocsr(), w, tag)


def opt3_coefficients(x: np.ndarray, d: DeformationParams, form: str = "full", power: str = "derived"):
    """Coefficients ``(A, B)`` of ``A d/dx + B d2/dx2`` for the ordinary-measure kinetic term.

    ``form="full"``: ``A = 2 K K'``, ``B = K**2`` (the divergence form
    ``d/dx(K**2 d/dx)``). ``form="linearized"`` (q kernel only): first order in
    ``eps = 1 - q``, ``A = 2 eps l0**2``, ``B = (1 + 2 eps x) l0**2``.
    ``power="printed"`` replaces the conformable ``B = x**(2-2a)`` by ``x**(2-a)``.
    """
    if form == "linearized":
        if d.kind is not Kind.Q_DERIV:
            raise ParameterError("the linearized form is defined for the q kernel")
        eps, l2 = 1.0 - d.q, d.l0**2
        return np.full_like(x, 2.0 * eps * l2), (1.0 + 2.0 * eps * x) * l2
    if form != "full":
        raise ParameterError(f"form must be 'full' or 'linearized', got {form!r}")
    K = np.asarray(d.kernel(x), dtype=float)
    A = 2.0 * K * np.asarray(d.kernel_prime(x), dtype=float)
    B = K * K
    if power == "printed":
        if d.kind not in (Kind.CONFORMABLE, Kind.KATUGAMPOLA):
            raise ParameterError("power='printed' applies to the conformable kernel")
        B = x ** (2.0 - d.alpha)
    elif power != "derived":
        raise ParameterError(f"power must be 'derived' or 'printed', got {power!r}")
    return A, B


def opt3_spatial_hamiltonian(
    x: np.ndarray, L: FieldLagrangian, V: np.ndarray, form: str = "full", power: str = "derived"
) -> HamiltonianMatrix:
    """``-hbar**2/(2m) [A d/dx + B d2/dx2] + V`` (no self-adjointness claimed)."""
    d = L.deform
    _check_kernel_domain(x, d)
    A, B = opt3_coefficients(x[1:-1], d, form, power)
    h = x[1] - x[0]
    T = sp.diags(A) @ first_derivative(len(x), h) + sp.diags(B) @ kinetic_standard(len(x), h)
    H = -(L.hbar**2 / (2.0 * L.mass)) * T + sp.diags(V[1:-1])
    tag = "plain" if d.is_identity and form == "full" else "none"
    return HamiltonianMatrix(H.tocsr(), np.ones(len(x) - 2), tag)


def eigenstates(Hm: HamiltonianMatrix, x: np.ndarray, k: int = 1):
    """Lowest ``k`` eigenpairs of a self-adjoint ``Hm``; states normalized in its measure."""
    if Hm.hermitian_under == "none":
        raise ParameterError("eigenstates needs a self-adjoint Hamiltonian")
    s = np.sqrt(Hm.weight)
    S = (s[:, None] * Hm.dense()) / s[None, :]
    S = 0.5 * (S + S.conj().T)
    E, U = eigh(S, subset_by_index=(0, k - 1))
    h = x[1] - x[0]
    states = []
    full_w = np.concatenate([[Hm.weight[0]], Hm.weight, [Hm.weight[-1]]])
    for j in range(k):
        u = U[:, j] / s
        u = u / math.sqrt(np.sum(np.abs(u) ** 2 * Hm.weight) * h)
        if np.real(u[np.argmax(np.abs(u))]) < 0:
            u = -u
        psi = np.zeros(len(x), dtype=complex)
        psi[1:-1] = u
        states.append(WaveFunction(x, psi, Hm.hermitian_under, full_w))
    return E, states


def gaussian(x, x0: float = 0.0, sigma: float = 1.0, k0: float = 0.0) -> np.ndarray:
    """Unit-norm Gaussian packet ``(2 pi s**2)**(-1/4) exp(-(x-x0)**2/(4 s**2) + i k0 x)``."""
    x = np.asarray(x, dtype=float)
    return (2 * np.pi * sigma**2) ** -0.25 * np.exp(-((x - x0) ** 2) / (4 * sigma**2) + 1j * k0 * x)


def free_gaussian_exact(x, t: float, x0: float = 0.0, sigma: float = 1.0, hbar: float = 1.0, mass: float = 1.0):
    """Free evolution of :func:`gaussian` with ``k0 = 0``."""
    a = 1.0 + 1j * hbar * t / (2.0 * mass * sigma**2)
    x = np.asarray(x, dtype=float)
    return (2 * np.pi * sigma**2) ** -0.25 / np.sqrt(a) * np.exp(-((x - x0) ** 2) / (4 * sigma**2 * a))


# --------------------------------------------------------------------------
# evolution records


@dataclass
class Evolution:
    """Snapshots of a propagation run.

    ``t`` are the snapshot times, ``psi`` the full-grid amplitudes (one row
    per snapshot), ``norms`` the measure norms at every step (with ``norm_t``).
    """

    x: np.ndarray
    t: np.ndarray
    psi: np.ndarray
    norm_t: np.ndarray
    norms: np.ndarray
    measure: str = "plain"
    weight: np.ndarray | None = None
    boundary: str = "dirichlet"
    diagnostics: dict = field(default_factory=dict)

    @property
    def final(self) -> WaveFunction:
        return self.state(-1)

    def state(self, i: int) -> WaveFunction:
        return WaveFunction(self.x, self.psi[i], self.measure, self.weight, self.boundary)

    def __len__(self):
        return len(self.t)

    @property
    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.norms / self.norms[0] - 1.0)))

    def snapshot_rows(self, stride: int = 1):
        rows = [("t", "x", "re_psi", "im_psi", "abs2")]
        for i in range(0, len(self.t), stride):
            for xv, p in zip(self.x, self.psi[i]):
                rows.append((self.t[i], xv, p.real, p.imag, abs(p) ** 2))
        return rows

    def norm_rows(self):
        return [("t", "norm")] + list(zip(self.norm_t, self.norms))


def _check_run(psi0: WaveFunction, L: FieldLagrangian, variant: FieldVariant, steps: int):
    if L.variant is not variant:
        raise ParameterError(f"expected a {variant.value} Lagrangian, got {L.variant.value}")
    if int(steps) != steps or steps < MIN_STEPS:
        raise ParameterError(f"steps must be an integer >= {MIN_STEPS}, got {steps}")


def _stride(steps: int, store_every: int | None) -> int:
    return max(1, steps // 200) if store_every is None else max(1, int(store_every))


def _weighted_norm(u: np.ndarray, w: np.ndarray, h: float) -> float:
    return float(np.sum(np.abs(u) ** 2 * w) * h)


def _crank_nicolson(Hm_of, u0, sig, times, hbar, h, stride, static=True):
    """Crank-Nicolson on the uniform ``sig`` grid; ``Hm_of(k)`` gives H for step ``k``."""
    steps = len(sig) - 1
    u = u0.astype(complex)
    Hm = Hm_of(0)
    w = Hm.weight
    n = len(u)
    I = sp.identity(n, dtype=complex, format="csc")
    lu = B = None
    cached = None
    snaps_t, snaps = [times[0]], [u.copy()]
    norms = np.empty(steps + 1)
    norms[0] = _weighted_norm(u, w, h)
    for k in range(steps):
        Hk = Hm_of(k)
        dsig = (sig[-1] - sig[0]) / steps  # uniform grid; avoids refactoring on round-off
        key = 0 if static else k
        if key != cached:
            A = (I + (0.5j * dsig / hbar) * Hk.H).tocsc()
            B = (I - (0.5j * dsig / hbar) * Hk.H).tocsr()
            lu = splu(A)
            cached = key
        u = lu.solve(B @ u)
        norms[k + 1] = _weighted_norm(u, w, h)
        if (k + 1) % stride == 0 or k + 1 == steps:
            snaps_t.append(times[k + 1])
            snaps.append(u.copy())
    if not np.all(np.isfinite(u)):
        raise IntegrationError("non-finite amplitudes in Crank-Nicolson propagation")
    return np.array(snaps_t), snaps, norms


def _pad(snaps, n_full):
    out = np.zeros((len(snaps), n_full), dtype=complex)
    for i, u in enumerate(snaps):
        out[i, 1:-1] = u
    return out


def _full_weight(w):
    return np.concatenate([[w[0]], w, [w[-1]]])


def _spectral(Hm: HamiltonianMatrix, u0, sig, factor):
    """``u(sig) = sum_n c_n factor(E_n, sig) phi_n`` for plain-hermitian H."""
    try:
        E, U = eigh(Hm.dense())
    except np.linalg.LinAlgError as err:
        cond = float(np.linalg.cond(Hm.dense()))
        raise ConvergenceError(f"eigendecomposition failed ({err}); condition estimate {cond:.3e}") from err
    c = U.conj().T @ u0
    return [U @ (c * factor(E, s)) for s in sig]


# --------------------------------------------------------------------------
# solvers


def solve_time_deformed(
    psi0: WaveFunction,
    L: FieldLagrangian,
    t1: float,
    steps: int,
    t0: float = 0.0,
    method: str = "cn",
    store_every: int | None = None,
    V=None,
) -> Evolution:
    """``i hbar K(t) dpsi/dt = H psi`` via the clock ``tau = s(t)`` (``t**a/a``).

    Crank-Nicolson (``method="cn"``) on a grid uniform in ``tau``, or exact
    spectral propagation (``method="spectral"``, time-independent V only).
    Snapshot times are reported in ``t``; ``diagnostics["tau"]`` has the clock.
    """
    _check_run(psi0, L, FieldVariant.TIME_DEFORMED, steps)
    d = L.deform
    if not (0 <= t0 < t1):
        raise ParameterError(f"need 0 <= t0 < t1, got {t0}, {t1}")
    pole = d.kernel_pole()
    if pole is not None and t0 <= pole <= t1:
        raise DomainError(f"kernel pole at t = {pole} inside [{t0}, {t1}]")
    x, h = psi0.x, psi0.dx
    tau = np.linspace(float(d.clock(t0)), float(d.clock(t1)), steps + 1)
    times = np.asarray(d.clock_inverse(tau), dtype=float)
    times[0], times[-1] = t0, t1
    stride = _stride(steps, store_every)
    u0 = psi0.interior()

    static = not _time_dependent(L, V)
    if not static:
        cache: dict[int, HamiltonianMatrix] = {}

        def Hm_of(k):
            if k not in cache:
                cache.clear()
                tm = float(d.clock_inverse(0.5 * (tau[k] + tau[k + 1])))
                cache[k] = standard_hamiltonian(x, L.mass, L.hbar, _potential_values(L, x, tm, None))
            return cache[k]

        if method != "cn":
            raise ParameterError("spectral propagation needs a time-independent potential")
    else:
        Hm = standard_hamiltonian(x, L.mass, L.hbar, _potential_values(L, x, t0, V))

        def Hm_of(k):
            return Hm

    if method == "cn":
        snap_t, snaps, norms = _crank_nicolson(Hm_of, u0, tau, times, L.hbar, h, stride, static)
    elif method == "spectral":
        idx = sorted(set(range(0, steps + 1, stride)) | {steps})
        snaps = _spectral(Hm, u0, tau[idx] - tau[0], lambda E, s: np.exp(-1j * E * s / L.hbar))
        snap_t = times[idx]
        norms = np.array([_weighted_norm(u, np.ones_like(u0, dtype=float), h) for u in snaps])
        norm_t = snap_t
    else:
        raise ParameterError(f"method must be 'cn' or 'spectral', got {method!r}")
    norm_t = times if method == "cn" else norm_t
    return Evolution(
        x, snap_t, _pad(snaps, len(x)), norm_t, norms, "plain", np.ones_like(x), diagnostics={"tau": tau}
    )


def solve_scale_q_time(
    psi0: WaveFunction,
    L: FieldLagrangian,
    t1: float,
    steps: int,
    store_every: int | None = 1,
    V=None,
) -> Evolution:
    """``psi(t) = sum_n c_n e_q(-i E_n t/hbar) phi_n`` from ``t = 0``.

    Solves ``i hbar [1 - i(1-q) t H/hbar] dpsi/dt = H psi`` (the scale-q
    derivative with the operator scale ``-iH/hbar``). ``q`` comes from
    ``L.deform``; the complex q-exponential uses the principal branch.
    """
    _check_run(psi0, L, FieldVariant.SCALE_Q_TIME, steps)
    if not t1 > 0:
        raise ParameterError(f"need t1 > 0, got {t1}")
    q = L.deform.q
    x, h = psi0.x, psi0.dx
    Hm = standard_hamiltonian(x, L.mass, L.hbar, _potential_values(L, x, 0.0, V))
    times = np.linspace(0.0, t1, steps + 1)
    stride = _stride(steps, store_every)
    idx = sorted(set(range(0, steps + 1, stride)) | {steps})
    snaps = _spectral(Hm, psi0.interior(), times[idx], lambda E, s: q_exp(-1j * E * s / L.hbar, q))
    norms = np.array([_weighted_norm(u, np.ones(len(u)), h) for u in snaps])
    return Evolution(x, times[idx], _pad(snaps, len(x)), times[idx], norms, "plain", np.ones_like(x),
                     diagnostics={"H": Hm, "q": q})


def scale_q_residual(evo: Evolution, L: FieldLagrangian) -> np.ndarray:
    """Max-norm residual of ``(I - i(1-q)tH/hbar) dpsi/dt + (i/hbar) H psi`` at
    interior snapshots (central differences; snapshots must be uniform in t)."""
    Hm: HamiltonianMatrix = evo.diagnostics["H"]
    q, hb = evo.diagnostics["q"], L.hbar
    dt = np.diff(evo.t)
    if np.max(np.abs(dt - dt[0])) > 1e-12 * abs(dt[0]):
        raise GridError("scale_q_residual needs uniformly spaced snapshots")
    U = evo.psi[:, 1:-1]
    out = []
    for i in range(1, len(evo.t) - 1):
        dpsi = (U[i + 1] - U[i - 1]) / (2 * dt[0])
        r = dpsi - (1j * (1 - q) * evo.t[i] / hb) * Hm.apply(dpsi) + (1j / hb) * Hm.apply(U[i])
        out.append(float(np.max(np.abs(r))))
    return np.array(out)


def principal_power(psi: np.ndarray, nu: float) -> np.ndarray:
    """``psi**nu`` on the principal branch, ``|psi|**(nu-1) psi e^{i(nu-1) arg psi}``."""
    psi = np.asarray(psi, dtype=complex)
    if nu == 1.0:
        return psi.copy()
    r = np.abs(psi)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(r > 0, r ** (nu - 1.0) * psi * np.exp(1j * (nu - 1.0) * np.angle(psi)), 0.0)
    return out


def _nrt_laplacian(wf: WaveFunction):
    n, h = len(wf.x), wf.dx
    if wf.boundary == "periodic":
        return _periodic_laplacian(n, h)
    return kinetic_standard(n, h)


def nrt_rhs(u: np.ndarray, lap: sp.csr_matrix, L: FieldLagrangian) -> np.ndarray:
    """``dpsi/dt = (i hbar/(2 m nu)) d2[psi**nu]`` with ``nu = 2 - q``."""
    nu = 2.0 - L.deform.q
    return (1j * L.hbar / (2.0 * L.mass * nu)) * (lap @ principal_power(u, nu))


def nrt_residual(psi: np.ndarray, dpsi_dt: np.ndarray, x: np.ndarray, L: FieldLagrangian) -> np.ndarray:
    """Pointwise residual ``i hbar dpsi/dt + hbar**2/(2 m nu) d2[psi**nu]`` at nodes
    ``2..n-3``, relative to ``max |i hbar dpsi/dt|``.

    ``psi`` is sampled on the uniform grid ``x`` (no boundary condition is
    applied); ``d2`` is the solver's fourth-order stencil.
    """
    nu = 2.0 - L.deform.q
    h = x[1] - x[0]
    f = principal_power(psi, nu)
    lap = (-f[:-4] + 16 * f[1:-3] - 30 * f[2:-2] + 16 * f[3:-1] - f[4:]) / (12 * h * h)
    lhs = 1j * L.hbar * np.asarray(dpsi_dt)[2:-2]
    r = lhs + (L.hbar**2 / (2.0 * L.mass * nu)) * lap
    return np.abs(r) / max(float(np.max(np.abs(lhs))), 1e-300)


def _rk4(u, dt, f):
    k1 = f(u)
    k2 = f(u + 0.5 * dt * k1)
    k3 = f(u + 0.5 * dt * k2)
    k4 = f(u + dt * k3)
    return u + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _branch_check(prev, new, x_nodes, nu):
    if float(nu).is_integer():
        return
    scale = float(np.max(np.abs(new)))
    crossed = (np.real(prev) < 0) & (np.real(new) < 0) & (np.sign(np.imag(prev)) * np.sign(np.imag(new)) < 0)
    crossed &= np.abs(new) > 1e-8 * scale
    if np.any(crossed):
        i = int(np.argmax(crossed))
        raise IntegrationError(
            f"amplitude crossed the principal-branch cut at x={x_nodes[i]:.6g}", location=float(x_nodes[i])
        )


def solve_nrt_nonlinear(
    psi0: WaveFunction,
    L: FieldLagrangian,
    t1: float,
    steps: int,
    tol: float = 1e-10,
    store_every: int | None = 1,
) -> Evolution:
    """``i hbar dpsi/dt = -(hbar**2/2m)(1/nu) d2[psi**nu]``, ``nu = 2 - q``, V = 0.

    With this exponent the q-plane wave ``e_q[i(kx - wt)]`` with
    ``hbar w = hbar**2 k**2/(2m)`` is an exact solution. Classical RK4 with
    step-doubling error control between the ``steps`` uniform output times.
    ``diagnostics["residual"]`` holds the relative PDE residual per output.
    """
    _check_run(psi0, L, FieldVariant.NRT_NONLINEAR, steps)
    if not (ex.free_vars(L.potential) == set() and float(ex.evaluate(L.potential, L.params)) == 0.0):
        raise ParameterError("the NRT solver supports V = 0 only")
    if not t1 > 0:
        raise ParameterError(f"need t1 > 0, got {t1}")
    nu = 2.0 - L.deform.q
    lap = _nrt_laplacian(psi0)
    x, h = psi0.x, psi0.dx
    xn = x[1:-1] if psi0.boundary == "dirichlet" else x

    def f(v):
        return nrt_rhs(v, lap, L)

    u = psi0.interior().copy()
    out_t = np.linspace(0.0, t1, steps + 1)
    stride = _stride(steps, store_every)
    snaps_t, snaps, norms, residuals = [0.0], [u.copy()], [_weighted_norm(u, np.ones(len(u)), h)], []
    # stability-limited first guess: RK4 covers |lambda dt| <= 2.8 on the imaginary axis
    lam_max = 4.0 / (h * h) * 4.0 / 3.0 * L.hbar / (2.0 * L.mass * nu) * max(1.0, nu) * max(1.0, float(np.max(np.abs(u))) ** (nu - 1))
    dt = min(2.5 / lam_max, out_t[1])
    substeps = 0
    for k in range(steps):
        t, target = out_t[k], out_t[k + 1]
        while t < target - 1e-15 * max(1.0, target):
            step = min(dt, target - t)
            full = _rk4(u, step, f)
            half = _rk4(_rk4(u, 0.5 * step, f), 0.5 * step, f)
            scale = max(1.0, float(np.max(np.abs(half))))
            err = float(np.max(np.abs(half - full))) / 15.0
            if not np.isfinite(err):
                raise IntegrationError(f"non-finite amplitudes near t={t:.6g}", location=t)
            if err <= tol * scale:
                new = half + (half - full) / 15.0
                _branch_check(u, new, xn, nu)
                u = new
                t += step
                substeps += 1
            grow = 0.9 * (tol * scale / max(err, 1e-300)) ** 0.2
            dt = step * min(2.0, max(0.2, grow))
            if dt < 1e-14 * max(1.0, t1):
                raise IntegrationError(f"step size underflow near t={t:.6g}", location=t)
        norms.append(_weighted_norm(u, np.ones(len(u)), h))
        if (k + 1) % stride == 0 or k + 1 == steps:
            snaps_t.append(target)
            snaps.append(u.copy())
    psi = np.array(snaps) if psi0.boundary == "periodic" else _pad(snaps, len(x))
    return Evolution(
        x, np.array(snaps_t), psi, out_t, np.array(norms), "plain", np.ones_like(x), psi0.boundary,
        diagnostics={"substeps": substeps, "nu": nu},
    )


def solve_spatial_deformed(
    psi0: WaveFunction,
    L: FieldLagrangian,
    t1: float,
    steps: int,
    store_every: int | None = None,
    V=None,
) -> Evolution:
    """``i hbar dpsi/dt = -hbar**2/(2m) (K d/dx)**2 psi + V psi`` by Crank-Nicolson.

    ``K`` is ``x**(1-a)`` (conformable) or ``1 + (1-q) x`` (q kernel);
    the norm is measured with weight ``1/K`` in which the scheme is unitary.
    """
    _check_run(psi0, L, FieldVariant.SPATIAL_DEFORMED, steps)
    if not t1 > 0:
        raise ParameterError(f"need t1 > 0, got {t1}")
    x, h = psi0.x, psi0.dx
    Hm = spatial_deformed_hamiltonian(x, L, _potential_values(L, x, 0.0, V))
    times = np.linspace(0.0, t1, steps + 1)
    snap_t, snaps, norms = _crank_nicolson(lambda k: Hm, psi0.interior(), times, times, L.hbar, h, _stride(steps, store_every))
    return Evolution(x, snap_t, _pad(snaps, len(x)), times, norms, Hm.hermitian_under, _full_weight(Hm.weight),
                     diagnostics={"H": Hm})


def solve_opt3_spatial(
    psi0: WaveFunction,
    L: FieldLagrangian,
    t1: float,
    steps: int,
    form: str = "full",
    power: str = "derived",
    store_every: int | None = None,
    V=None,
) -> Evolution:
    """``i hbar dpsi/dt = -hbar**2/(2m) [A psi' + B psi''] + V psi`` by Crank-Nicolson.

    See :func:`opt3_coefficients` for ``A``, ``B``, ``form`` and ``power``.
    The norm is not conserved in general; ``norm_drift`` reports it.
    """
    _check_run(psi0, L, FieldVariant.OPT3_SPATIAL, steps)
    if not t1 > 0:
        raise ParameterError(f"need t1 > 0, got {t1}")
    x, h = psi0.x, psi0.dx
    Hm = opt3_spatial_hamiltonian(x, L, _potential_values(L, x, 0.0, V), form, power)
    times = np.linspace(0.0, t1, steps + 1)
    snap_t, snaps, norms = _crank_nicolson(lambda k: Hm, psi0.interior(), times, times, L.hbar, h, _stride(steps, store_every))
    evo = Evolution(x, snap_t, _pad(snaps, len(x)), times, norms, "plain", np.ones_like(x), diagnostics={"H": Hm})
    log.info("opt3 spatial run: norm drift %.3e", evo.norm_drift)
    return evo


def null_potential(psi0: WaveFunction, L: FieldLagrangian, form: str = "full", power: str = "derived") -> np.ndarray:
    """Potential making ``psi0`` a zero-energy state of the discrete opt3 operator
    (``V = -T psi0 / psi0`` node-wise; ``psi0`` must be real and nonzero inside)."""
    x = psi0.x
    u = psi0.interior()
    if np.any(np.abs(u) < 1e-300) or np.max(np.abs(u.imag)) > 0:
        raise ParameterError("null_potential needs a real psi0 that is nonzero on interior nodes")
    zero = np.zeros_like(x)
    T = opt3_spatial_hamiltonian(x, L, zero, form, power).H
    V = np.zeros_like(x)
    V[1:-1] = -np.real(T @ u) / u.real
    return V
