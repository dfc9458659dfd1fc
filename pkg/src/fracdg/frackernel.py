"""Riemann-Liouville operators acting on slab-wise polynomials in time.

The central object is the history block

.. math::

    G^\\gamma_{j,i}[q, p] = \\int_{I_j} \\phi^{(j)}_q(t)
        \\bigl(D^\\gamma_{0+} (\\phi^{(i)}_p \\chi_{I_i})\\bigr)(t) \\, \\mathrm{d}t,

where :math:`\\phi^{(j)}_q` is the ``q``-th shifted Legendre polynomial mapped
to slab ``I_j`` and :math:`D^\\gamma_{0+} = D I^{1 - \\gamma}_{0+}`. Row ``q``
is the test index, column ``p`` the trial index.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np
from scipy import special

from fracdg.mesh import GradedMesh
from fracdg.polybasis import (
    TimeBasis,
    default_quad_points,
    gamma_fn,
    graded_panel_rule,
)

__all__ = [
    "FracOrder",
    "FractionalKernel",
    "HistoryBlock",
    "diagonal_block",
    "history_block",
    "rl_derivative_of_power",
    "rl_integral_of_slab_poly",
]


@dataclass(frozen=True)
class FracOrder:
    gamma: float

    def __post_init__(self) -> None:
        if not (0.0 < float(self.gamma) < 1.0):
            raise ValueError(f"fractional order must lie in (0, 1), got {self.gamma}")

    def __float__(self) -> float:
        return float(self.gamma)


def _order(gamma) -> float:
    return float(FracOrder(float(gamma)))


@dataclass(frozen=True)
class HistoryBlock:
    j: int
    i: int
    gamma: float
    entries: np.ndarray


# {{{ slab potentials


def _slab_potential(gamma: float, mono: np.ndarray, x) -> np.ndarray:
    """``sum_k c[p, k] int_0^min(x, 1) (x - s)^-gamma s^k ds`` for every row of
    *mono*; the result has shape ``(P,) + x.shape``.
    """
    x = np.asarray(x, dtype=float)
    b = 1.0 - gamma
    out = np.zeros((mono.shape[0],) + x.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(x > 1.0, 1.0 / x, 1.0)
    for k in range(mono.shape[1]):
        if not np.any(mono[:, k]):
            continue
        bk = special.betainc(k + 1.0, b, z) * special.beta(k + 1.0, b)
        term = x ** (k + 1.0 - gamma) * bk
        out += mono[:, k].reshape((-1,) + (1,) * x.ndim) * term
    return out


def rl_integral_of_slab_poly(gamma, mesh: GradedMesh, i: int, p: int, t, m: int | None = None):
    """``I^{1 - gamma}(phi_p chi_{I_i})(t)`` for ``t >= t_{i-1}``."""
    gamma = _order(gamma)
    mesh.check_slab(i)
    basis = TimeBasis(p if m is None else m)
    a, _ = mesh.slab(i)
    tau = mesh.width(i)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < a):
        raise ValueError(f"RL integral of slab {i} requested before its start t={a}")
    mono = basis.monomial_expansion(p)[None, :]
    val = _slab_potential(gamma, mono, (t_arr - a) / tau)[0]
    val = tau ** (1.0 - gamma) / gamma_fn(1.0 - gamma) * val
    return float(val) if val.ndim == 0 else val


def rl_derivative_of_power(gamma, r: float, t):
    """Riemann-Liouville derivative of ``t^r``: ``Gamma(r+1)/Gamma(r+1-gamma) t^(r-gamma)``."""
    gamma = _order(gamma)
    if not r > gamma - 1.0:
        raise ValueError(f"power t^{r} has no integrable RL derivative of order {gamma}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise ValueError("RL derivative of a power is evaluated for t > 0 only")
    coef = special.gamma(r + 1.0) / special.gamma(r + 1.0 - gamma)
    val = coef * t_arr ** (r - gamma)
    return float(val) if val.ndim == 0 else val


# }}}


# {{{ blocks


def diagonal_block(gamma, tau: float, m: int) -> np.ndarray:
    """Closed-form ``G_{j,j}`` for a slab of width *tau*.

    On ``I_j`` the derivative of ``((t - t_{j-1}) / tau)^k`` is
    ``tau^-k Gamma(k+1) / Gamma(k+1-gamma) (t - t_{j-1})^(k-gamma)``, which is
    then integrated against the test monomials exactly.
    """
    gamma = _order(gamma)
    mono = TimeBasis(m).monomials
    ks = np.arange(m + 1)
    rule = special.gamma(ks + 1.0) / special.gamma(ks + 1.0 - gamma)
    # moments[l, k] = int_0^1 x^l x^(k - gamma) dx
    moments = 1.0 / (ks[:, None] + ks[None, :] + 1.0 - gamma)
    block = mono @ moments @ (mono * rule[None, :]).T
    return tau ** (1.0 - gamma) * block


def _offdiag_entries(gamma, mesh, basis, j, idx, nodes, weights) -> np.ndarray:
    """Blocks ``G_{j,i}`` for slabs ``i in idx`` (all ``< j``) from integration
    by parts on ``I_j``, the remaining integral by the rule (*nodes*, *weights*).
    """
    a_j, b_j = mesh.slab(j)
    tau_j = b_j - a_j
    a_i = mesh.nodes[idx - 1][:, None]
    tau_i = mesh.widths[idx - 1][:, None]
    scale = tau_i[:, 0] ** (1.0 - gamma) / gamma_fn(1.0 - gamma)

    mono = basis.monomials
    # F[p, i, k]
    F = _slab_potential(gamma, mono, (nodes[None, :] - a_i) / tau_i)
    F_end = _slab_potential(gamma, mono, np.column_stack([(a_j - a_i[:, 0]), (b_j - a_i[:, 0])]) / tau_i)

    dphi = basis.derivatives((nodes - a_j) / tau_j) / tau_j  # (Q, K)
    phi0 = basis.values([0.0])[:, 0]
    phi1 = basis.values([1.0])[:, 0]

    interior = np.einsum("qk,k,pik->iqp", dphi, weights, F)
    boundary = phi1[None, :, None] * F_end[:, :, 1].T[:, None, :] - phi0[None, :, None] * F_end[:, :, 0].T[:, None, :]
    return scale[:, None, None] * (boundary - interior)


def _offdiag_row(gamma, mesh: GradedMesh, basis: TimeBasis, j: int, k: int) -> np.ndarray:
    """All blocks ``G_{j,i}``, ``i = 1, ..., j - 1``, shape ``(j - 1, m+1, m+1)``."""
    size = basis.size
    out = np.empty((j - 1, size, size))
    if j == 1:
        return out
    a_j, b_j = mesh.slab(j)
    tau_j = b_j - a_j
    idx = np.arange(1, j)
    dist = a_j - mesh.nodes[idx]  # distance from I_j to the end of I_i
    far = dist >= tau_j

    if np.any(far):
        nodes, weights = graded_panel_rule(a_j, b_j, tau_j, k)
        out[far] = _offdiag_entries(gamma, mesh, basis, j, idx[far], nodes, weights)
    for i in idx[~far]:
        nodes, weights = graded_panel_rule(a_j, b_j, float(max(dist[i - 1], 0.0)), k)
        out[i - 1] = _offdiag_entries(gamma, mesh, basis, j, np.array([i]), nodes, weights)[0]
    return out


def history_block(gamma, mesh: GradedMesh, m: int, j: int, i: int) -> HistoryBlock:
    gamma = _order(gamma)
    mesh.check_slab(j)
    mesh.check_slab(i)
    if i > j:
        raise IndexError(f"history block needs i <= j, got i={i}, j={j}")
    basis = TimeBasis(m)
    if i == j:
        entries = diagonal_block(gamma, mesh.width(j), m)
    else:
        a_j, b_j = mesh.slab(j)
        dist = max(a_j - float(mesh.nodes[i]), 0.0)
        nodes, weights = graded_panel_rule(a_j, b_j, dist, default_quad_points(m))
        entries = _offdiag_entries(gamma, mesh, basis, j, np.array([i]), nodes, weights)[0]
    return HistoryBlock(j=j, i=i, gamma=gamma, entries=entries)


class FractionalKernel:
    """Row-wise cache of history blocks for one order *gamma* on one mesh.

    ``row(j)`` returns ``G_{j,i}`` for ``i = 1, ..., j`` stacked along the first
    axis. On uniform meshes the blocks depend only on ``j - i``, so a single
    row ``J`` serves every ``j``.
    """

    def __init__(self, gamma, mesh: GradedMesh, m: int, quad_points: int | None = None) -> None:
        self.gamma = _order(gamma)
        self.mesh = mesh
        self.basis = TimeBasis(m)
        self.k = default_quad_points(m) if quad_points is None else int(quad_points)
        self._rows: dict[int, np.ndarray] = {}
        self._lock = threading.Lock()

    @property
    def m(self) -> int:
        return self.basis.m

    def row(self, j: int) -> np.ndarray:
        self.mesh.check_slab(j)
        if self.mesh.is_uniform:
            full = self._cached(self.mesh.J)
            return full[self.mesh.J - j :]
        return self._cached(j)

    def block(self, j: int, i: int) -> np.ndarray:
        if not (1 <= i <= j):
            raise IndexError(f"history block needs 1 <= i <= j, got i={i}, j={j}")
        return self.row(j)[i - 1]

    def assembled(self) -> np.ndarray:
        """Block lower-triangular matrix of all ``G_{j,i}``, size ``J (m+1)``."""
        J, s = self.mesh.J, self.basis.size
        G = np.zeros((J * s, J * s))
        for j in range(1, J + 1):
            row = self.row(j)
            for i in range(1, j + 1):
                G[(j - 1) * s : j * s, (i - 1) * s : i * s] = row[i - 1]
        return G

    def _cached(self, j: int) -> np.ndarray:
        row = self._rows.get(j)
        if row is None:
            row = self._compute(j)
            with self._lock:
                self._rows.setdefault(j, row)
        return row

    def _compute(self, j: int) -> np.ndarray:
        s = self.basis.size
        row = np.empty((j, s, s))
        row[: j - 1] = _offdiag_row(self.gamma, self.mesh, self.basis, j, self.k)
        row[j - 1] = diagonal_block(self.gamma, self.mesh.width(j), self.m)
        row.setflags(write=False)
        return row


# }}}
