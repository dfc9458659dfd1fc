"""Conforming P_n finite elements on a uniform 1D partition with homogeneous
Dirichlet conditions.

Local bases are nodal at the Gauss-Lobatto points of each cell. Global
degrees of freedom are numbered left to right, so the interior-only matrices
are banded with half-bandwidth ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy import linalg

from fracdg.mesh import SpatialPartition
from fracdg.polybasis import gauss_legendre

__all__ = ["SpatialFem", "assemble", "l2_error", "l2_norm", "load_vector", "ritz_project"]


@lru_cache(maxsize=None)
def _lobatto_nodes(n: int) -> np.ndarray:
    """``n + 1`` Gauss-Lobatto points on ``[0, 1]``."""
    if n == 1:
        x = np.array([-1.0, 1.0])
    else:
        inner = npleg.legroots(npleg.legder(np.eye(n + 1)[n]))
        x = np.concatenate([[-1.0], np.sort(inner), [1.0]])
    return 0.5 * (x + 1.0)


def _lagrange(nodes: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of the Lagrange basis on *nodes*, each ``(len(nodes), len(x))``."""
    k = nodes.size
    val = np.ones((k, x.size))
    der = np.zeros((k, x.size))
    for a in range(k):
        others = [b for b in range(k) if b != a]
        denom = np.prod([nodes[a] - nodes[b] for b in others])
        for b in others:
            val[a] *= x - nodes[b]
            prod = np.ones_like(x)
            for c in others:
                if c != b:
                    prod = prod * (x - nodes[c])
            der[a] += prod
        val[a] /= denom
        der[a] /= denom
    return val, der


@dataclass(frozen=True)
class SpatialFem:
    partition: SpatialPartition
    n: int
    mass: np.ndarray = field(repr=False)
    stiffness: np.ndarray = field(repr=False)
    dof_coords: np.ndarray = field(repr=False)

    @property
    def ndof(self) -> int:
        return self.mass.shape[0]

    @property
    def h(self) -> float:
        return self.partition.h

    def cell_dofs(self, e: int) -> np.ndarray:
        """Interior dof indices of the local nodes of cell *e*; -1 marks a boundary node."""
        glob = e * self.n + np.arange(self.n + 1) - 1
        glob[glob >= self.ndof] = -1
        return glob

    def basis_at(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """For points *x*: owning cell, local basis values ``(n+1, len(x))`` and
        global x-derivatives."""
        x = np.asarray(x, dtype=float)
        p = self.partition
        e = np.clip(((x - p.a) / p.h).astype(int), 0, p.cells - 1)
        xi = (x - p.a) / p.h - e
        val, der = _lagrange(_lobatto_nodes(self.n), xi)
        return e, val, der / p.h

    def evaluate(self, c: np.ndarray, x) -> np.ndarray:
        """Value of ``sum_k c_k psi_k`` at points *x*. *c* may carry trailing
        axes ``(ndof, ...)``."""
        x = np.asarray(x, dtype=float)
        e, val, _ = self.basis_at(x)
        return np.einsum("ax,ax...->x...", val, self._gather(c, e))

    def _gather(self, c: np.ndarray, e: np.ndarray) -> np.ndarray:
        c = np.asarray(c, dtype=float)
        padded = np.concatenate([c, np.zeros((1,) + c.shape[1:])])  # index -1 -> 0
        glob = e[None, :] * self.n + np.arange(self.n + 1)[:, None] - 1
        glob = np.where((glob < 0) | (glob >= self.ndof), -1, glob)
        return padded[glob]

    def quadrature(self, degree: int) -> tuple[np.ndarray, np.ndarray]:
        """Global Gauss points and weights exact for polynomials of *degree* per cell."""
        rule = gauss_legendre(max(1, (degree + 2) // 2))
        p = self.partition
        left = p.a + p.h * np.arange(p.cells)
        x = (left[:, None] + p.h * rule.nodes[None, :]).ravel()
        w = np.tile(p.h * rule.weights, p.cells)
        return x, w

    def banded(self, matrix: np.ndarray) -> np.ndarray:
        """Upper banded storage for :func:`scipy.linalg.solveh_banded`."""
        n = self.n
        ab = np.zeros((n + 1, self.ndof))
        for d in range(n + 1):
            ab[n - d, d:] = np.diagonal(matrix, d)
        return ab


def assemble(partition: SpatialPartition, n: int) -> SpatialFem:
    if n not in (1, 2, 3):
        raise ValueError(f"local degree must be 1, 2 or 3, got {n}")
    rule = gauss_legendre(n + 1)  # exact for degree 2n
    val, der = _lagrange(_lobatto_nodes(n), rule.nodes)
    h = partition.h
    m_loc = h * (val * rule.weights) @ val.T
    a_loc = (der * rule.weights) @ der.T / h

    nfull = partition.cells * n + 1
    M = np.zeros((nfull, nfull))
    A = np.zeros((nfull, nfull))
    for e in range(partition.cells):
        sl = slice(e * n, e * n + n + 1)
        M[sl, sl] += m_loc
        A[sl, sl] += a_loc
    M = M[1:-1, 1:-1]
    A = A[1:-1, 1:-1]

    coords = partition.a + h * (np.arange(partition.cells)[:, None] + _lobatto_nodes(n)[None, :-1]).ravel()
    coords = np.append(coords, partition.b)[1:-1]
    for arr in (M, A, coords):
        arr.setflags(write=False)
    return SpatialFem(partition=partition, n=n, mass=M, stiffness=A, dof_coords=coords)


def load_vector(fem: SpatialFem, g, degree: int | None = None) -> np.ndarray:
    """``(g, psi_l)`` for every interior basis function ``psi_l``."""
    x, w = fem.quadrature(2 * fem.n + 4 if degree is None else degree)
    return _project_values(fem, x, w * np.asarray(g(x), dtype=float))


def _project_values(fem: SpatialFem, x: np.ndarray, wg: np.ndarray) -> np.ndarray:
    """Scatter weighted samples ``wg`` (shape ``(len(x), ...)``) onto the basis."""
    e, val, _ = fem.basis_at(x)
    glob = e[None, :] * fem.n + np.arange(fem.n + 1)[:, None] - 1
    out = np.zeros((fem.ndof + 2,) + wg.shape[1:])
    contrib = val.reshape(val.shape + (1,) * (wg.ndim - 1)) * wg[None]
    np.add.at(out, glob.ravel() + 1, contrib.reshape((-1,) + wg.shape[1:]))
    return out[1:-1]


def load_matrix(fem: SpatialFem, degree: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature points ``x`` and the matrix ``P`` with ``load(g) = P @ g(x)``."""
    x, w = fem.quadrature(2 * fem.n + 4 if degree is None else degree)
    return x, _project_values(fem, x, np.diag(w))


def ritz_project(fem: SpatialFem, v, dv=None) -> np.ndarray:
    """Coefficients of ``R_h v``: ``(d(v - R_h v)/dx, d psi_l/dx) = 0``.

    The right-hand side ``(v', psi_l')`` is integrated by parts elementwise,
    ``-(v, psi_l'') + [v psi_l']``, so only values of *v* are needed; pass *dv*
    to use the derivative directly instead.
    """
    x, w = fem.quadrature(2 * fem.n + 14)  # the data is not polynomial; keep quadrature error near roundoff
    e, _, der = fem.basis_at(x)
    if dv is not None:
        rhs_vals = der * (w * np.asarray(dv(x), dtype=float))[None, :]
        rhs = _scatter_local(fem, e, rhs_vals)
    else:
        rhs = _ritz_rhs_by_parts(fem, v, x, w, e)
    c = linalg.solveh_banded(fem.banded(fem.stiffness), rhs)
    return c


def _scatter_local(fem: SpatialFem, e: np.ndarray, local: np.ndarray) -> np.ndarray:
    glob = e[None, :] * fem.n + np.arange(fem.n + 1)[:, None] - 1
    out = np.zeros(fem.ndof + 2)
    np.add.at(out, glob.ravel() + 1, local.ravel())
    return out[1:-1]


def _ritz_rhs_by_parts(fem, v, x, w, e) -> np.ndarray:
    p = fem.partition
    nodes = _lobatto_nodes(fem.n)
    xi = (x - p.a) / p.h - e
    # second derivatives of the local Lagrange basis via its monomial form
    second = np.zeros((fem.n + 1, x.size))
    ends = np.zeros((fem.n + 1, 2))
    for a in range(fem.n + 1):
        target = np.zeros(fem.n + 1)
        target[a] = 1.0
        coef = np.polynomial.polynomial.polyfit(nodes, target, fem.n)
        d1 = np.polynomial.polynomial.polyder(coef)
        d2 = np.polynomial.polynomial.polyder(coef, 2)
        second[a] = np.polynomial.polynomial.polyval(xi, d2) / p.h**2
        ends[a] = np.polynomial.polynomial.polyval([0.0, 1.0], d1) / p.h
    vx = np.asarray(v(x), dtype=float)
    local = -second * (w * vx)[None, :]
    rhs = _scatter_local(fem, e, local)

    left = p.a + p.h * np.arange(p.cells)
    vl = np.asarray(v(left), dtype=float)
    vr = np.asarray(v(left + p.h), dtype=float)
    cells = np.arange(p.cells)
    bnd = ends[:, 1][:, None] * vr[None, :] - ends[:, 0][:, None] * vl[None, :]
    rhs += _scatter_local(fem, cells, bnd)
    return rhs


def l2_norm(fem: SpatialFem, c: np.ndarray) -> float:
    c = np.asarray(c, dtype=float)
    return float(np.sqrt(max(c @ fem.mass @ c, 0.0)))


def l2_error(fem: SpatialFem, c: np.ndarray, v, degree: int | None = None) -> float:
    """``|| sum_k c_k psi_k - v ||_{L^2}`` by cellwise Gauss quadrature."""
    x, w = fem.quadrature(2 * fem.n + 4 if degree is None else degree)
    diff = fem.evaluate(c, x) - np.asarray(v(x), dtype=float)
    return float(np.sqrt(np.dot(w, diff**2)))
