"""Reference-interval polynomials, quadrature rules and the scalar special
functions shared by the rest of the package.

Everything here lives on the unit interval ``[0, 1]``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as npleg
from numpy.polynomial import polynomial as nppoly
from scipy import special

__all__ = [
    "MAX_TIME_DEGREE",
    "QuadRule",
    "TimeBasis",
    "default_quad_points",
    "gamma_fn",
    "gauss_jacobi",
    "gauss_legendre",
    "graded_panel_rule",
    "inc_beta_lower",
]

MAX_TIME_DEGREE = 4
MAX_QUAD_POINTS = 64


# {{{ special functions


def gamma_fn(x: float) -> float:
    """Gamma function restricted to positive real arguments."""
    x = float(x)
    if not x > 0.0 or not math.isfinite(x):
        raise ValueError(f"gamma_fn needs a positive finite argument, got {x!r}")
    return math.gamma(x)


def inc_beta_lower(z, a: float, b: float):
    r"""Unregularized lower incomplete beta function

    .. math::

        B_z(a, b) = \int_0^z s^{a - 1} (1 - s)^{b - 1} \, \mathrm{d}s.

    *z* may be an array; values must lie in ``[0, 1]``.
    """
    if not (a > 0 and b > 0):
        raise ValueError(f"inc_beta_lower needs a > 0 and b > 0, got a={a}, b={b}")
    z = np.asarray(z, dtype=float)
    if np.any(z < 0.0) or np.any(z > 1.0) or np.any(np.isnan(z)):
        raise ValueError("inc_beta_lower needs 0 <= z <= 1")
    result = special.betainc(a, b, z) * special.beta(a, b)
    return float(result) if result.ndim == 0 else result


# }}}


# {{{ quadrature


@dataclass(frozen=True)
class QuadRule:
    """Quadrature rule on ``[0, 1]``.

    For ``kind == "jacobi"`` the weights already absorb the weight function
    ``(1 - x)^(-gamma)`` (``side == "right"``) or ``x^(-gamma)``
    (``side == "left"``), i.e. ``sum(w * g(x))`` approximates
    ``int_0^1 weight(x) g(x) dx``.
    """

    kind: str
    nodes: np.ndarray
    weights: np.ndarray
    gamma: float = 0.0
    side: str | None = None

    @property
    def count(self) -> int:
        return self.nodes.size

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def _check_count(k: int) -> None:
    if not (1 <= k <= MAX_QUAD_POINTS):
        raise ValueError(f"quadrature point count must be in [1, {MAX_QUAD_POINTS}], got {k}")


@lru_cache(maxsize=None)
def _leggauss01(k: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = npleg.leggauss(k)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(k: int) -> QuadRule:
    _check_count(k)
    x, w = _leggauss01(k)
    return QuadRule("legendre", x, w)


def _polished_jacobi(k: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Jacobi nodes and weights on [-1, 1] for ``(1 - y)^a (1 + y)^b``.

    scipy's eigenvalue-based weights drift at larger *k*; a few Newton steps on
    the nodes and the closed-form weights restore them.
    """
    y, _ = special.roots_jacobi(k, a, b)
    c = 0.5 * (k + a + b + 1.0)
    for _ in range(3):
        y = y - special.eval_jacobi(k, a, b, y) / (c * special.eval_jacobi(k - 1, a + 1.0, b + 1.0, y))
    dp = c * special.eval_jacobi(k - 1, a + 1.0, b + 1.0, y)
    lead = math.exp(
        math.lgamma(k + a + 1.0) + math.lgamma(k + b + 1.0) - math.lgamma(k + a + b + 1.0) - math.lgamma(k + 1.0)
    )
    w = lead * 2.0 ** (a + b + 1.0) / ((1.0 - y) * (1.0 + y) * dp**2)
    # the node next to the singular end carries most of the mass and the
    # largest error in (1 -+ y); fix it through the exact total mass
    mass = 2.0 ** (a + b + 1.0) * special.beta(a + 1.0, b + 1.0)
    i = int(np.argmin(y)) if b < a else int(np.argmax(y))
    w[i] = mass - math.fsum(np.delete(w, i))
    return y, w


@lru_cache(maxsize=None)
def _jacobi01(k: int, exponent: float, side: str) -> tuple[np.ndarray, np.ndarray]:
    # the weight on [-1, 1] is (1 - y)^a (1 + y)^b
    if side == "right":
        y, w = _polished_jacobi(k, exponent, 0.0)
    else:
        y, w = _polished_jacobi(k, 0.0, exponent)
    x = 0.5 * (y + 1.0)
    w = w * 0.5 ** (exponent + 1.0)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_jacobi(k: int, gamma: float, side: str = "right") -> QuadRule:
    """Gauss rule on ``[0, 1]`` for the weight ``(1 - x)^(-gamma)`` (right) or
    ``x^(-gamma)`` (left).

    *gamma* may be any real ``< 1``; negative values give a vanishing weight
    ``x^|gamma|`` which the graded panel rules use for forcing terms.
    """
    _check_count(k)
    if not gamma < 1.0:
        raise ValueError(f"Gauss-Jacobi weight exponent must be < 1, got {gamma}")
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    x, w = _jacobi01(k, -float(gamma), side)
    return QuadRule("jacobi", x, w, gamma=float(gamma), side=side)


def default_quad_points(m: int) -> int:
    """Point count used wherever exactness is not guaranteed analytically."""
    env = _env_quad_points()
    if env is not None:
        return env
    return max(2 * (m + 1) + 4, 12)


def _env_quad_points() -> int | None:
    value = os.environ.get("FRACDG_QUAD_POINTS")
    if not value:
        return None
    k = int(value)
    _check_count(k)
    return k


def graded_panel_rule(
    a: float,
    b: float,
    dist: float,
    k: int = 12,
    *,
    levels: int = 48,
    tip_exponent: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss rule on ``[a, b]`` for integrands that are analytic on
    ``[a, b]`` but singular at ``c = a - dist``.

    Panels grow geometrically away from ``c`` so that every panel is no longer
    than its distance to the singular point; with ``dist >= b - a`` this is a
    single Gauss-Legendre panel. When ``dist == 0`` the innermost panel has
    length ``(b - a) 2^-levels``; if *tip_exponent* ``e`` is given it uses a
    Gauss-Jacobi rule with weight ``(t - a)^e`` folded into the weights, so
    integrands behaving like ``(t - a)^e`` near ``a`` are resolved. The tip
    offsets are far below the resolution of a nonzero ``a``, so the tip rule
    is only offered for ``a == 0``.

    Returns ``(nodes, weights)`` in absolute coordinates.
    """
    length = b - a
    if not length > 0:
        raise ValueError(f"empty interval [{a}, {b}]")
    if dist < 0:
        raise ValueError("singular point must lie at or left of the interval")
    if tip_exponent is not None and dist == 0 and a != 0:
        raise ValueError("a tip rule needs the singular point at the origin (a == 0)")

    x01, w01 = _leggauss01(k)
    if dist >= length:
        return a + length * x01, length * w01

    # offsets y from a: y_{l+1} = 2 y_l + dist keeps panel length == distance
    if dist > 0:
        y = [0.0, dist]
    else:
        y = [0.0, length * 2.0**-levels]
    while y[-1] < length:
        y.append(min(2.0 * y[-1] + dist, length))
    if length - y[-2] < 0.25 * (y[-2] - y[-3]) and len(y) > 3:
        # merge a sliver at the far end
        y.pop(-2)

    y = np.asarray(y)
    lo, hi = y[:-1], y[1:]
    h = hi - lo
    nodes = (lo[:, None] + h[:, None] * x01[None, :]).ravel()
    weights = (h[:, None] * w01[None, :]).ravel()

    if dist == 0 and tip_exponent is not None and tip_exponent != 0.0:
        eps = h[0]
        xj, wj = _jacobi01(k, float(tip_exponent), "left")
        tip_nodes = eps * xj
        # int_0^eps g(y) dy = eps^(1+e) sum wj g(eps xj) / (eps xj)^e
        tip_weights = eps * wj / xj**tip_exponent
        nodes = np.concatenate([tip_nodes, nodes[k:]])
        weights = np.concatenate([tip_weights, weights[k:]])

    return a + nodes, weights


# }}}


# {{{ time basis


@lru_cache(maxsize=None)
def _shifted_legendre_monomials(m: int) -> np.ndarray:
    """Row ``p`` holds the power-series coefficients of ``P_p(2x - 1)``."""
    coeffs = np.zeros((m + 1, m + 1))
    for p in range(m + 1):
        c = npleg.Legendre.basis(p, domain=[0.0, 1.0]).convert(kind=nppoly.Polynomial).coef
        coeffs[p, : c.size] = c
    coeffs.setflags(write=False)
    return coeffs


class TimeBasis:
    """Shifted Legendre polynomials ``phi_p(x) = P_p(2x - 1)`` on ``[0, 1]``.

    They are orthogonal with ``int phi_p phi_q = delta_pq / (2p + 1)`` and
    satisfy ``phi_p(1) = 1``, ``phi_p(0) = (-1)^p``.
    """

    def __init__(self, m: int) -> None:
        if not (0 <= m <= MAX_TIME_DEGREE):
            raise ValueError(f"time degree must be in [0, {MAX_TIME_DEGREE}], got {m}")
        self.m = int(m)

    def __repr__(self) -> str:
        return f"TimeBasis(m={self.m})"

    @property
    def size(self) -> int:
        return self.m + 1

    def eval(self, p: int, x):
        self._check_index(p)
        return npleg.legval(2.0 * np.asarray(x, dtype=float) - 1.0, _unit(p))

    def deriv(self, p: int, x):
        self._check_index(p)
        dc = npleg.legder(_unit(p))
        return 2.0 * npleg.legval(2.0 * np.asarray(x, dtype=float) - 1.0, dc)

    def values(self, x) -> np.ndarray:
        """All basis values, shape ``(m + 1, len(x))``."""
        x = np.asarray(x, dtype=float)
        return np.stack([self.eval(p, x) for p in range(self.size)])

    def derivatives(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.stack([self.deriv(p, x) for p in range(self.size)])

    def monomial_expansion(self, p: int) -> np.ndarray:
        """Coefficients ``c_k`` with ``phi_p(x) = sum_k c_k x^k``."""
        self._check_index(p)
        return _shifted_legendre_monomials(self.m)[p, : p + 1].copy()

    @property
    def monomials(self) -> np.ndarray:
        """``(m + 1) x (m + 1)`` table, row ``p`` = :meth:`monomial_expansion`."""
        return _shifted_legendre_monomials(self.m)

    def _check_index(self, p: int) -> None:
        if not (0 <= p <= self.m):
            raise IndexError(f"basis index {p} outside [0, {self.m}]")


def _unit(p: int) -> np.ndarray:
    c = np.zeros(p + 1)
    c[p] = 1.0
    return c


# }}}
