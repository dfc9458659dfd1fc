"""Time-stepping discontinuous Galerkin solver for

    u_t - (kappa1 D^alpha + kappa2 D^beta) u_xx = f,   u = 0 on the boundary,
    u(., 0) = u0,

with Riemann-Liouville derivatives ``D^gamma = D I^(1 - gamma)``.

On slab ``I_j`` the solution is ``sum_{p,k} u[j, p, k] phi_p(s) psi_k(x)`` with
``s = (t - t_{j-1}) / tau_j``; each slab is one linear solve

    [C (x) M + (kappa1 G^alpha_jj + kappa2 G^beta_jj) (x) A] u_j = b_j

whose right side carries the forcing, the upwind trace of the previous slab
and the fractional history of all earlier slabs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import linalg

from fracdg.fem1d import SpatialFem, load_matrix, ritz_project
from fracdg.frackernel import FracOrder, FractionalKernel, rl_derivative_of_power
from fracdg.mesh import GradedMesh
from fracdg.polybasis import TimeBasis, gauss_legendre, graded_panel_rule

__all__ = [
    "ManufacturedForcing",
    "ProblemSpec",
    "SlabSolveError",
    "SpaceTimeSolution",
    "manufactured_forcing",
    "manufactured_problem",
    "slab_time_matrix",
    "solve",
    "step_slab",
]

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10


class SlabSolveError(RuntimeError):
    pass


def _zero(x, t=None):
    return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class ProblemSpec:
    """Data of the subdiffusion problem.

    ``f(x, t)`` and ``exact(x, t)`` must broadcast over array arguments.
    ``forcing_exponent`` optionally states that ``f`` behaves like ``t^e`` as
    ``t -> 0+``; the first time slab then uses a matching Gauss-Jacobi tip.
    """

    alpha: float = 0.2
    beta: float = 0.8
    kappa1: float = 1.0
    kappa2: float = 1.0
    T: float = 1.0
    u0: Callable = _zero
    f: Callable = _zero
    exact: Callable | None = None
    forcing_exponent: float | None = None

    def __post_init__(self) -> None:
        FracOrder(self.alpha)
        FracOrder(self.beta)
        if not self.alpha < self.beta:
            raise ValueError(f"need alpha < beta, got alpha={self.alpha}, beta={self.beta}")
        if not (self.kappa1 > 0 and self.kappa2 > 0):
            raise ValueError("diffusivities kappa1, kappa2 must be positive")
        if not self.T > 0:
            raise ValueError("final time must be positive")


@dataclass
class SpaceTimeSolution:
    mesh: GradedMesh
    fem: SpatialFem
    m: int
    coeffs: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(default=None, repr=False)

    def trace(self, j: int) -> np.ndarray:
        """``U(t_j)`` from the left; ``U_0 = 0`` by convention."""
        if j == 0:
            return np.zeros(self.fem.ndof)
        self.mesh.check_slab(j)
        # phi_p(1) = 1 for every p
        return self.coeffs[j - 1].sum(axis=0)

    def start_trace(self, j: int) -> np.ndarray:
        """``U_{j-1}^+``, the value at the left end of slab ``j``."""
        self.mesh.check_slab(j)
        signs = (-1.0) ** np.arange(self.m + 1)
        return signs @ self.coeffs[j - 1]

    def at(self, t: float) -> np.ndarray:
        """Space coefficients of ``U(t)``, left-continuous at the nodes."""
        j = self.mesh.locate(t)
        a, _ = self.mesh.slab(j)
        s = (t - a) / self.mesh.width(j)
        phi = TimeBasis(self.m).values([s])[:, 0]
        return phi @ self.coeffs[j - 1]

    @property
    def traces(self) -> np.ndarray:
        """``U(t_j)`` for ``j = 1, ..., J``, shape ``(J, ndof)``."""
        return self.coeffs.sum(axis=1)


def slab_time_matrix(m: int) -> np.ndarray:
    """``C[q, p] = int_0^1 phi_p' phi_q + phi_p(0) phi_q(0)``."""
    basis = TimeBasis(m)
    rule = gauss_legendre(m + 1)
    phi = basis.values(rule.nodes)
    dphi = basis.derivatives(rule.nodes)
    start = basis.values([0.0])[:, 0]
    return (phi * rule.weights) @ dphi.T + np.outer(start, start)


# {{{ manufactured data


class ManufacturedForcing:
    """Right-hand side for the exact solution ``u = t^r sin(pi x)`` on ``(0, 1)``."""

    def __init__(self, r, alpha, beta, kappa1, kappa2) -> None:
        if not r > beta - 1.0:
            raise ValueError(f"need r > beta - 1 for an integrable forcing, got r={r}")
        self.r = float(r)
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.kappa1 = float(kappa1)
        self.kappa2 = float(kappa2)
        g = math.gamma
        self._c1 = kappa1 * g(r + 1.0) / g(r + 1.0 - alpha)
        self._c2 = kappa2 * g(r + 1.0) / g(r + 1.0 - beta)

    @property
    def exponent(self) -> float:
        """Leading power of ``t`` as ``t -> 0+``."""
        return min(self.r - 1.0, self.r - self.beta) if self.r != 0 else -self.beta

    @staticmethod
    def spatial(x):
        return np.sin(np.pi * np.asarray(x, dtype=float))

    def time_profile(self, t):
        t = np.asarray(t, dtype=float)
        r = self.r
        ddt = r * t ** (r - 1.0) if r != 0 else np.zeros_like(t)
        frac = self._c1 * t ** (r - self.alpha) + self._c2 * t ** (r - self.beta)
        return ddt + np.pi**2 * frac

    def __call__(self, x, t):
        return self.spatial(x) * self.time_profile(t)


def manufactured_forcing(r, alpha, beta, kappa1, kappa2) -> ManufacturedForcing:
    return ManufacturedForcing(r, alpha, beta, kappa1, kappa2)


def manufactured_problem(
    r: float,
    alpha: float = 0.2,
    beta: float = 0.8,
    kappa1: float = 1.0,
    kappa2: float = 1.0,
    T: float = 1.0,
) -> ProblemSpec:
    forcing = manufactured_forcing(r, alpha, beta, kappa1, kappa2)

    def exact(x, t):
        return np.asarray(t, dtype=float) ** r * np.sin(np.pi * np.asarray(x, dtype=float))

    def u0(x):
        return exact(x, 0.0) if r == 0 else np.zeros_like(np.asarray(x, dtype=float))

    return ProblemSpec(
        alpha=alpha,
        beta=beta,
        kappa1=kappa1,
        kappa2=kappa2,
        T=T,
        u0=u0,
        f=forcing,
        exact=exact,
        forcing_exponent=forcing.exponent,
    )


# }}}


# {{{ stepping


class _Slabs:
    """Per-solve state shared by the slab steps: kernels, time matrix and the
    space-time forcing quadrature."""

    def __init__(self, spec: ProblemSpec, mesh: GradedMesh, fem: SpatialFem, m: int) -> None:
        if abs(mesh.T - spec.T) > 1e-14 * spec.T:
            raise ValueError(f"mesh final time {mesh.T} differs from problem T={spec.T}")
        self.spec = spec
        self.mesh = mesh
        self.fem = fem
        self.basis = TimeBasis(m)
        self.C = slab_time_matrix(m)
        self.kalpha = FractionalKernel(spec.alpha, mesh, m)
        self.kbeta = FractionalKernel(spec.beta, mesh, m)
        self.xq, self.load = load_matrix(fem)
        self.time_points = max(m + 3, 8)
        self._factors: dict[float, tuple] = {}

    def kernel_row(self, j: int) -> np.ndarray:
        s = self.spec
        return s.kappa1 * self.kalpha.row(j) + s.kappa2 * self.kbeta.row(j)

    def forcing(self, j: int) -> np.ndarray:
        """``b[q] = int_{I_j} phi_q(s(t)) (f(., t), psi)`` as an ``(m+1, ndof)`` array."""
        a, b = self.mesh.slab(j)
        tip = self.spec.forcing_exponent if j == 1 else None
        if tip is not None and tip >= 1.0:
            tip = None
        t, w = graded_panel_rule(a, b, a, self.time_points, tip_exponent=tip)
        fx = np.asarray(self.spec.f(self.xq[:, None], t[None, :]), dtype=float)
        loads = self.load @ np.broadcast_to(fx, (self.xq.size, t.size))
        phi = self.basis.values((t - a) / (b - a))
        return (phi * w) @ loads.T

    def factor(self, j: int, diag: np.ndarray):
        tau = self.mesh.width(j)
        lu = self._factors.get(tau)
        if lu is None:
            S = np.kron(self.C, self.fem.mass) + np.kron(diag, self.fem.stiffness)
            lu = (S, linalg.lu_factor(S, check_finite=True))
            if self.mesh.is_uniform:
                self._factors[tau] = lu
        return lu


def step_slab(
    spec: ProblemSpec,
    mesh: GradedMesh,
    fem: SpatialFem,
    m: int,
    j: int,
    history: np.ndarray,
    prev_trace: np.ndarray,
    *,
    _state: _Slabs | None = None,
) -> np.ndarray:
    """Solve slab *j* given ``history[q] = sum_{i<j} sum_p Kjoint_{j,i}[q, p] A u_{i,p}``
    and ``prev_trace`` (``U_{j-1}``, or ``R_h u0`` when ``j == 1``).

    Returns the ``(m+1, ndof)`` coefficient array of the slab.
    """
    state = _state if _state is not None else _Slabs(spec, mesh, fem, m)
    coeffs, _ = _step(state, j, history, prev_trace)
    return coeffs


def _step(state: _Slabs, j: int, history: np.ndarray, prev_trace: np.ndarray):
    fem = state.fem
    size = state.basis.size
    start = state.basis.values([0.0])[:, 0]
    rhs = state.forcing(j) + np.outer(start, fem.mass @ prev_trace) - history
    rhs = rhs.ravel()
    if not np.all(np.isfinite(rhs)):
        raise SlabSolveError(f"slab {j}: non-finite right-hand side (forcing, trace or history)")

    diag = state.kernel_row(j)[-1]
    S, lu = state.factor(j, diag)
    u = linalg.lu_solve(lu, rhs)
    bnorm = np.linalg.norm(rhs)
    resid = np.linalg.norm(S @ u - rhs) / bnorm if bnorm > 0 else float(np.linalg.norm(S @ u))
    if not np.all(np.isfinite(u)) or resid > RESIDUAL_TOL:
        cond = np.linalg.cond(S)
        raise SlabSolveError(
            f"slab {j}: relative residual {resid:.3e} (tolerance {RESIDUAL_TOL:.0e}), "
            f"condition number {cond:.3e}, tau={state.mesh.width(j):.3e}"
        )
    return u.reshape(size, fem.ndof), resid


def solve(spec: ProblemSpec, mesh: GradedMesh, fem: SpatialFem, m: int) -> SpaceTimeSolution:
    state = _Slabs(spec, mesh, fem, m)
    J, size, ndof = mesh.J, m + 1, fem.ndof
    coeffs = np.zeros((J, size, ndof))
    Au = np.zeros((J, size, ndof))
    residuals = np.zeros(J)

    prev = ritz_project(fem, spec.u0)
    for j in range(1, J + 1):
        if j > 1:
            row = state.kernel_row(j)[:-1]  # (j-1, q, p)
            history = np.tensordot(row, Au[: j - 1], axes=([0, 2], [0, 1]))
        else:
            history = np.zeros((size, ndof))
        u, residuals[j - 1] = _step(state, j, history, prev)
        coeffs[j - 1] = u
        Au[j - 1] = u @ fem.stiffness  # A symmetric
        prev = u.sum(axis=0)

    return SpaceTimeSolution(mesh=mesh, fem=fem, m=m, coeffs=coeffs, residuals=residuals)


# }}}
