"""Independent reference computations used to check the solver.

Nothing in here is used by :mod:`fracdg.dgsolver`; each routine takes a
different route to the quantity it checks (series, adaptive quadrature,
closed forms).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, linalg, special

from fracdg.fem1d import SpatialFem, load_vector, ritz_project
from fracdg.mesh import GradedMesh
from fracdg.polybasis import TimeBasis, gauss_jacobi, gauss_legendre, graded_panel_rule

__all__ = [
    "ModeSolution",
    "SeriesRangeError",
    "SpectralReference",
    "brute_force_kernel_block",
    "brute_force_kernel_entry",
    "classical_dg_scalar",
    "dg0_reference_solve",
    "mittag_leffler",
    "seminorm_estimate",
    "spectral_reference",
    "stability_quantities",
    "w_series",
    "w_series_residual",
]

EPS = np.finfo(float).eps


class SeriesRangeError(ArithmeticError):
    """The Picard series cannot deliver the requested tolerance."""

    def __init__(self, message: str, bound: float) -> None:
        super().__init__(message)
        self.bound = bound


# {{{ Picard series


@dataclass(frozen=True)
class ModeSolution:
    """Solution ``w`` of ``w + lam (k1 I^(1-a) + k2 I^(1-b)) w = 1`` as the
    double power series

        w(t) = sum_r sum_{p+q=r} C(r, p) (-lam k1)^p (-lam k2)^q
                   t^(p(1-a) + q(1-b)) / Gamma(1 + p(1-a) + q(1-b)).
    """

    lam: float
    kappa1: float
    kappa2: float
    alpha: float
    beta: float
    tol: float = 1e-13
    max_order: int = 400

    def terms(self, t: float, order: int) -> tuple[np.ndarray, np.ndarray]:
        """Signed terms of total order *order* and their exponents of ``t``."""
        terms, expo, _ = self._terms(t, order)
        return terms, expo

    def _terms(self, t, order):
        p = np.arange(order + 1)
        q = order - p
        expo = p * (1.0 - self.alpha) + q * (1.0 - self.beta)
        with np.errstate(divide="ignore", invalid="ignore"):
            pieces = (
                special.gammaln(order + 1.0),
                -special.gammaln(p + 1.0),
                -special.gammaln(q + 1.0),
                -special.gammaln(1.0 + expo),
                _xlogy(p, self.lam * self.kappa1),
                _xlogy(q, self.lam * self.kappa2),
                _xlogy(expo, t),
            )
            logmag = sum(pieces)
            # absolute error of logmag, in units of eps
            scale = sum(np.abs(np.nan_to_num(x, posinf=0.0, neginf=0.0)) for x in pieces)
        mag = np.exp(logmag)
        err = 2.0 * mag * (1.0 + scale)
        # direct products carry only a few roundings each; prefer them when finite
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            direct = (
                special.comb(order, p)
                * (self.lam * self.kappa1) ** p
                * (self.lam * self.kappa2) ** q
                * t**expo
                * special.rgamma(1.0 + expo)
            )
        ok = np.isfinite(direct) & (direct > 1e-280)
        mag = np.where(ok, direct, mag)
        err = np.where(ok, 8.0 * direct, err)
        return (-1.0) ** order * mag, expo, err

    def evaluate(self, t: float) -> tuple[float, int, float]:
        """``(w(t), truncation order R, tail bound)``."""
        if t < 0:
            raise ValueError("w is defined for t >= 0")
        if self.lam == 0.0 or t == 0.0:
            return 1.0, 0, 0.0
        parts: list[float] = []
        rounding = 0.0
        prev = math.inf
        for r in range(self.max_order + 1):
            terms, _, err = self._terms(t, r)
            group = float(np.sum(np.abs(terms)))
            parts.extend(terms.tolist())
            rounding += EPS * float(np.sum(err))
            if r > 0 and group < self.tol and group <= prev:
                value = math.fsum(parts)
                if rounding > self.tol:
                    raise SeriesRangeError(
                        f"cancellation: rounding in the terms limits accuracy to {rounding:.3e}",
                        rounding,
                    )
                return value, r, group
            prev = group
        raise SeriesRangeError(
            f"series not converged to {self.tol:.1e} after {self.max_order} orders "
            f"(last group magnitude {group:.3e})",
            group,
        )

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        vals = np.array([self.evaluate(float(s))[0] for s in t_arr.ravel()]).reshape(t_arr.shape)
        return float(vals) if vals.ndim == 0 else vals


def _xlogy(x, y):
    x = np.asarray(x, dtype=float)
    if y == 0.0:
        return np.where(x == 0, 0.0, -np.inf)
    return x * math.log(y)


def w_series(lam, kappa1, kappa2, alpha, beta, t, tol=1e-13) -> float:
    for kappa in (kappa1, kappa2):
        if kappa < 0:
            raise ValueError("diffusivities must be non-negative")
    if lam < 0:
        raise ValueError("eigenvalue must be non-negative")
    return ModeSolution(lam, kappa1, kappa2, alpha, beta, tol).evaluate(float(t))[0]


def w_series_residual(lam, kappa1, kappa2, alpha, beta, t, tol=1e-13) -> float:
    """``w + lam (k1 I^(1-a) + k2 I^(1-b)) w - 1`` for the truncated series,
    with every fractional integral applied term by term through
    ``I^nu t^e = Gamma(e+1) / Gamma(e+1+nu) t^(e+nu)``."""
    mode = ModeSolution(lam, kappa1, kappa2, alpha, beta, tol)
    _, R, _ = mode.evaluate(t)
    parts = [-1.0]
    for r in range(R + 1):
        terms, expo = mode.terms(t, r)
        parts.extend(terms.tolist())
        for kappa, nu in ((kappa1, 1.0 - alpha), (kappa2, 1.0 - beta)):
            factor = np.exp(special.gammaln(expo + 1.0) - special.gammaln(expo + 1.0 + nu)) * t**nu
            parts.extend((lam * kappa * terms * factor).tolist())
    return math.fsum(parts)


def mittag_leffler(a: float, z: float, tol: float = 1e-15, max_terms: int = 2000) -> float:
    """One-parameter Mittag-Leffler function ``E_a(z) = sum z^k / Gamma(a k + 1)``
    by its power series; intended for moderate ``|z|``."""
    parts = []
    for k in range(max_terms):
        term = math.exp(k * math.log(abs(z)) - math.lgamma(a * k + 1.0)) if z != 0 else float(k == 0)
        parts.append(math.copysign(term, z) if (k % 2 and z < 0) else term)
        if k > 5 and term < tol:
            return math.fsum(parts)
    raise SeriesRangeError(f"Mittag-Leffler series did not converge for z={z}", term)


# }}}


# {{{ spectral reference


class SpectralReference:
    """Eigenfunction expansion of the exact solution on ``(0, 1)``:

        u(x, t) = sum_k u_k(t) sin(k pi x),
        u_k(t) = u_k(0) w_k(t) + int_0^t w_k(t - s) f_k(s) ds,

    with ``w_k`` the Picard series for ``lam = (k pi)^2``.
    """

    def __init__(self, spec, K: int, tol: float = 1e-10, xpoints: int = 256) -> None:
        self.spec = spec
        self.K = int(K)
        self.tol = tol
        # 2 int_0^1 g(x) sin(k pi x) dx by a composite Gauss rule
        rule = gauss_legendre(8)
        cells = xpoints // 8
        left = np.arange(cells) / cells
        self._x = (left[:, None] + rule.nodes[None, :] / cells).ravel()
        self._w = np.tile(rule.weights / cells, cells)
        self._sines = np.sin(np.outer(np.arange(1, self.K + 1) * np.pi, self._x))
        self.u0_modes = 2.0 * self._sines @ (self._w * np.asarray(spec.u0(self._x), dtype=float))
        self.modes = [
            ModeSolution((k * np.pi) ** 2, spec.kappa1, spec.kappa2, spec.alpha, spec.beta, tol=1e-14)
            for k in range(1, self.K + 1)
        ]
        self._cache: dict[float, np.ndarray] = {}

    def forcing_mode(self, k: int, s: float) -> float:
        fx = np.asarray(self.spec.f(self._x, s), dtype=float)
        return 2.0 * float(self._sines[k - 1] @ (self._w * fx))

    def mode_values(self, t: float) -> np.ndarray:
        t = float(t)
        cached = self._cache.get(t)
        if cached is not None:
            return cached
        out = np.empty(self.K)
        for k in range(1, self.K + 1):
            w = self.modes[k - 1]
            value = self.u0_modes[k - 1] * w(t) if self.u0_modes[k - 1] != 0 else 0.0
            if t > 0:
                conv, _ = integrate.quad(
                    lambda s: w(t - s) * self.forcing_mode(k, s),
                    0.0,
                    t,
                    epsabs=self.tol,
                    epsrel=self.tol,
                    limit=200,
                )
                value += conv
            out[k - 1] = value
        self._cache[t] = out
        return out

    def __call__(self, x, t):
        x = np.asarray(x, dtype=float)
        modes = self.mode_values(float(t))
        k = np.arange(1, self.K + 1)
        return np.tensordot(modes, np.sin(np.pi * np.multiply.outer(k, x)), axes=1)


def spectral_reference(spec, K: int = 1, tol: float = 1e-10) -> SpectralReference:
    return SpectralReference(spec, K, tol)


# }}}


# {{{ kernel oracle


def brute_force_kernel_block(gamma, mesh: GradedMesh, m: int, j: int, i: int, tol=1e-13) -> np.ndarray:
    """``int_{I_j} phi_q D^gamma (phi_p chi_{I_i}) dt`` for all ``q, p``.

    For ``i < j - 1`` the slabs are apart and ``D^gamma`` is differentiated
    under the integral sign, giving the smooth double integral

        -gamma / Gamma(1 - gamma) int_{I_j} int_{I_i} phi_q(t) phi_p(s) (t - s)^(-1-gamma) ds dt.

    Otherwise ``phi_p chi_{(a, b)} = P(t) H(t - a) - P(t) H(t - b)`` with
    ``P`` expanded about ``a`` and about ``b``, and the power rule gives
    ``D^gamma`` pointwise as a sum of ``(t - c)^(k - gamma)`` terms. Each term
    is integrated against ``phi_q`` with QUADPACK, using the algebraic weight
    when ``c`` is the left end of ``I_j``.
    """
    if not (1 <= i <= j <= mesh.J):
        raise IndexError("need 1 <= i <= j <= J")
    basis = TimeBasis(m)
    a, b = mesh.slab(i)
    tau = b - a
    aj, bj = mesh.slab(j)
    tau_j = bj - aj
    if i < j - 1:
        return _separated_block(gamma, basis, a, b, aj, bj, tol)
    ks = np.arange(m + 1)
    about_a = basis.monomials / tau ** ks[None, :]
    binom = np.array([[math.comb(l, k) for l in ks] for k in ks], dtype=float)
    shift = binom * tau ** np.maximum(ks[None, :] - ks[:, None], 0)
    about_b = about_a @ shift.T
    rule = np.array([math.gamma(k + 1.0) / math.gamma(k + 1.0 - gamma) for k in ks])

    def moment(q, c, e):
        # int_{I_j} phi_q(t) (t - c)^e dt
        def phi(t):
            return float(basis.eval(q, (t - aj) / tau_j))

        if c == aj:
            val, err = integrate.quad(phi, aj, bj, weight="alg", wvar=(e, 0.0), epsabs=tol, epsrel=1e-14, limit=200)
        else:
            val, err = integrate.quad(lambda t: phi(t) * (t - c) ** e, aj, bj, epsabs=tol, epsrel=1e-14, limit=200)
        if err > 100 * tol:
            raise ArithmeticError(f"kernel oracle did not converge: error estimate {err:.2e}")
        return val

    out = np.zeros((basis.size, basis.size))
    for q in range(basis.size):
        ma = np.array([moment(q, a, k - gamma) for k in ks])
        out[q] += about_a @ (rule * ma)
        if i < j:
            mb = np.array([moment(q, b, k - gamma) for k in ks])
            out[q] -= about_b @ (rule * mb)
    return out


def _separated_block(gamma, basis, a, b, aj, bj, tol):
    # the inner integrand is analytic on I_i; a Gauss pair with an error check
    # replaces adaptive quadrature unless the two disagree
    coarse, fine = gauss_legendre(24), gauss_legendre(48)
    phis = [basis.values(r.nodes) for r in (coarse, fine)]

    def inner(t):
        est = []
        for rule, phi in zip((coarse, fine), phis):
            s = a + (b - a) * rule.nodes
            est.append((b - a) * (phi * (rule.weights * (t - s) ** (-1.0 - gamma))).sum(axis=1))
        if np.max(np.abs(est[1] - est[0])) <= max(tol * 1e-2, 1e-14 * np.max(np.abs(est[1]))):
            return est[1]

        def f(s):
            return basis.values([(s - a) / (b - a)])[:, 0] * (t - s) ** (-1.0 - gamma)

        val, _ = integrate.quad_vec(f, a, b, epsabs=tol * 1e-2, epsrel=1e-13, norm="max")
        return val

    def outer(t):
        return np.outer(basis.values([(t - aj) / (bj - aj)])[:, 0], inner(t))

    val, err = integrate.quad_vec(outer, aj, bj, epsabs=tol, epsrel=1e-13, norm="max")
    if err > 100 * tol:
        raise ArithmeticError(f"kernel oracle did not converge: error estimate {err:.2e}")
    return -gamma / math.gamma(1.0 - gamma) * val


def brute_force_kernel_entry(gamma, mesh: GradedMesh, m: int, j: int, i: int, q: int, p: int, tol=1e-13) -> float:
    return float(brute_force_kernel_block(gamma, mesh, m, j, i, tol)[q, p])


# }}}


# {{{ seminorm diagnostic


def _path_values(mesh: GradedMesh, coeffs: np.ndarray, slab: int, t: np.ndarray) -> np.ndarray:
    """Values of the slab polynomial at times *t*: shape ``(len(t), ncomp)``."""
    a, b = mesh.slab(slab)
    m = coeffs.shape[1] - 1
    phi = TimeBasis(m).values((t - a) / (b - a))
    return phi.T @ coeffs[slab - 1]


def _mirror(nodes, weights, a, b):
    return a + b - nodes, weights


def seminorm_estimate(order: float, mesh: GradedMesh, coeffs, j: int | None = None, k: int = 16) -> float:
    """Double-integral seminorm of the zero extension of a piecewise-polynomial path,

        ( int_R int_R |v(s) - v(t)|^2 / |s - t|^(1 + 2 order) ds dt )^(1/2),

    where ``v`` is the path on ``(0, t_j)`` and zero elsewhere. *coeffs* has
    shape ``(J, m+1)`` or ``(J, m+1, ncomp)`` (Legendre coefficients per slab);
    components are summed in quadrature.

    Zero extensions of paths with jumps or nonzero end values have infinite
    seminorm for ``order > 1/2``; ``inf`` is returned in that case.
    """
    if not (0.0 < order < 1.0) or order == 0.5:
        raise ValueError(f"order must lie in (0, 1/2) or (1/2, 1), got {order}")
    j = mesh.J if j is None else int(j)
    if j > 32:
        raise ValueError("seminorm_estimate is limited to 32 slabs (O(J^2) panel pairs)")
    mesh.check_slab(j)
    c = np.asarray(coeffs, dtype=float)
    if c.ndim == 2:
        c = c[:, :, None]
    m = c.shape[1] - 1
    if order > 0.5:
        return math.inf
    e = 1.0 + 2.0 * order

    total = 0.0
    gl = gauss_legendre(k)
    inner_pts = max(m + 1, 2)
    gj_diag = gauss_jacobi(inner_pts + 2, -(1.0 - 2.0 * order), "left")  # weight u^(1-2 order)

    for a_idx in range(1, j + 1):
        a0, a1 = mesh.slab(a_idx)
        tau = a1 - a0
        # diagonal: 2 int_0^tau u^(1-2o) int_0^(tau-u) [(v(t+u) - v(t)) / u]^2 dt du
        if m > 0:
            u = tau * gj_diag.nodes
            wu = tau ** (2.0 - 2.0 * order) * gj_diag.weights
            rule = gauss_legendre(inner_pts + 1)
            for uk, wk in zip(u, wu):
                t = a0 + (tau - uk) * rule.nodes
                diff = (_path_values(mesh, c, a_idx, t + uk) - _path_values(mesh, c, a_idx, t)) / uk
                total += 2.0 * wk * (tau - uk) * float(np.sum(rule.weights[:, None] * diff**2))

        for b_idx in range(a_idx + 1, j + 1):
            b0, b1 = mesh.slab(b_idx)
            if b_idx == a_idx + 1:
                total += 2.0 * _adjacent_pair(mesh, c, a_idx, order, k)
                continue
            dist = b0 - a1
            tb, wb = graded_panel_rule(b0, b1, dist, k)
            ta, wa = _mirror(*graded_panel_rule(a0, a1, dist, k), a0, a1)
            vb = _path_values(mesh, c, b_idx, tb)
            va = _path_values(mesh, c, a_idx, ta)
            sq = np.sum((vb[:, None, :] - va[None, :, :]) ** 2, axis=-1)
            kern = (tb[:, None] - ta[None, :]) ** -e
            total += 2.0 * float(wb @ (sq * kern) @ wa)

    # exterior: 2 int_0^tj |v(s)|^2 (s^-2o + (tj - s)^-2o) / (2 o) ds
    tj = float(mesh.nodes[j])
    ext = 0.0
    for a_idx in range(1, j + 1):
        a0, a1 = mesh.slab(a_idx)
        for side in ("left", "right"):
            if side == "left":
                if a_idx == 1:
                    rule = gauss_jacobi(k, 2.0 * order, "left")
                    t = a0 + (a1 - a0) * rule.nodes
                    w = (a1 - a0) ** (1.0 - 2.0 * order) * rule.weights
                else:
                    t, w = graded_panel_rule(a0, a1, a0, k)
                    w = w * t ** (-2.0 * order)
            else:
                if a_idx == j:
                    rule = gauss_jacobi(k, 2.0 * order, "right")
                    t = a0 + (a1 - a0) * rule.nodes
                    w = (a1 - a0) ** (1.0 - 2.0 * order) * rule.weights
                else:
                    t, w = _mirror(*graded_panel_rule(a0, a1, tj - a1, k), a0, a1)
                    w = w * (tj - t) ** (-2.0 * order)
            vals = _path_values(mesh, c, a_idx, t)
            ext += float(w @ np.sum(vals**2, axis=-1))
    total += 2.0 * ext / (2.0 * order)
    return math.sqrt(max(total, 0.0))


def _adjacent_pair(mesh, c, a_idx, order, k) -> float:
    """``int_{I_a} int_{I_{a+1}} |v(s) - v(t)|^2 |s - t|^-(1+2o) ds dt`` with
    the corner singularity removed by a Duffy split."""
    a0, node = mesh.slab(a_idx)
    _, b1 = mesh.slab(a_idx + 1)
    X, Y = b1 - node, node - a0
    e = 1.0 + 2.0 * order
    m = c.shape[1] - 1
    gj = gauss_jacobi(m + 2, 2.0 * order, "left")  # weight x^(-2 o)

    total = 0.0
    # T1: y = x c w, x in [0, X]; T2: x = y d w, y in [0, Y]
    for length, ratio, swap in ((X, Y / X, False), (Y, X / Y, True)):
        r = length * gj.nodes
        wr = length ** (1.0 - 2.0 * order) * gj.weights
        wq, ww = graded_panel_rule(0.0, 1.0, 1.0 / ratio, k)
        R, W = np.meshgrid(r, wq, indexing="ij")
        other = R * ratio * W
        xs, ys = (other, R) if swap else (R, other)
        vr = _path_values(mesh, c, a_idx + 1, node + xs.ravel())
        vl = _path_values(mesh, c, a_idx, node - ys.ravel())
        sq = np.sum((vr - vl) ** 2, axis=-1).reshape(R.shape)
        kern = (1.0 + ratio * W) ** -e
        total += ratio * float(wr @ (sq * kern) @ ww)
    return total


def stability_quantities(solution, spec, k: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of the discrete stability estimate for ``j = 1, ..., J``:

        lhs_j = ||U(t_j)|| + sqrt(k1) |U|_{H^(a/2)(0,t_j; H^1_0)} + sqrt(k2) |U|_{H^(b/2)(...)},
        rhs_j = ||u0||_{H^1_0} + ||f||_{L^2_beta(0, t_j; H^-1)} / sqrt(k2).

    ``||u0||_{H^1_0}`` is taken from its Ritz projection and the ``H^-1`` norm
    is the discrete dual norm ``sqrt(b^T A^-1 b)`` of the load vector.
    """
    mesh, fem = solution.mesh, solution.fem
    if mesh.J > 32:
        raise ValueError("stability diagnostic is limited to J <= 32")
    chol = linalg.cholesky(fem.stiffness, lower=True)
    # H^1_0 coordinates: |c|_A = |L^T c|
    path = solution.coeffs @ chol
    lhs = np.empty(mesh.J)
    for j in range(1, mesh.J + 1):
        trace = solution.trace(j)
        lhs[j - 1] = math.sqrt(max(trace @ fem.mass @ trace, 0.0))
        lhs[j - 1] += math.sqrt(spec.kappa1) * seminorm_estimate(spec.alpha / 2, mesh, path, j, k)
        lhs[j - 1] += math.sqrt(spec.kappa2) * seminorm_estimate(spec.beta / 2, mesh, path, j, k)

    c0 = ritz_project(fem, spec.u0)
    u0_norm = math.sqrt(max(c0 @ fem.stiffness @ c0, 0.0))

    def dual_sq(t):
        b = load_vector(fem, lambda x: spec.f(x, t))
        return float(b @ linalg.solve(fem.stiffness, b, assume_a="pos"))

    cum = 0.0
    rhs = np.empty(mesh.J)
    for j in range(1, mesh.J + 1):
        a, b = mesh.slab(j)
        tip = None
        if j == 1 and spec.forcing_exponent is not None:
            tip = spec.beta + 2.0 * spec.forcing_exponent
        t, w = graded_panel_rule(a, b, a, k, tip_exponent=tip)
        cum += float(sum(wi * ti**spec.beta * dual_sq(ti) for ti, wi in zip(t, w)))
        rhs[j - 1] = u0_norm + math.sqrt(cum) / math.sqrt(spec.kappa2)
    return lhs, rhs


# }}}


# {{{ independent steppers


@lru_cache(maxsize=None)
def _gamma2(gamma: float) -> float:
    return math.gamma(2.0 - gamma)


def _l1_weight(t: np.ndarray, j: int, i: int, gamma: float) -> float:
    """Piecewise-constant history coupling in closed form."""
    g = 1.0 - gamma
    if i == j:
        return (t[j] - t[j - 1]) ** g / _gamma2(gamma)
    return (
        (t[j] - t[i - 1]) ** g - (t[j] - t[i]) ** g - (t[j - 1] - t[i - 1]) ** g + (t[j - 1] - t[i]) ** g
    ) / _gamma2(gamma)


def dg0_reference_solve(spec, mesh: GradedMesh, fem: SpatialFem) -> np.ndarray:
    """Piecewise-constant-in-time scheme written out directly: an implicit
    Euler step with L1-type convolution weights,

        M (U_j - U_{j-1}) + sum_{i<=j} (k1 w^a_{ji} + k2 w^b_{ji}) A U_i = int_{I_j} (f, psi) dt.

    The forcing integral uses adaptive vector quadrature. Returns ``(J, ndof)``
    nodal traces.
    """
    t = mesh.nodes
    J = mesh.J
    M, A = fem.mass, fem.stiffness
    U = np.zeros((J + 1, fem.ndof))
    U[0] = ritz_project(fem, spec.u0)

    def load(s):
        return load_vector(fem, lambda x: spec.f(x, s))

    for j in range(1, J + 1):
        rhs, _ = integrate.quad_vec(load, t[j - 1], t[j], epsabs=1e-15, epsrel=1e-13, limit=2000)
        rhs = rhs + M @ U[j - 1]
        for i in range(1, j):
            w = spec.kappa1 * _l1_weight(t, j, i, spec.alpha) + spec.kappa2 * _l1_weight(t, j, i, spec.beta)
            rhs -= w * (A @ U[i])
        wjj = spec.kappa1 * _l1_weight(t, j, j, spec.alpha) + spec.kappa2 * _l1_weight(t, j, j, spec.beta)
        U[j] = np.linalg.solve(M + wjj * A, rhs)
    return U[1:]


def classical_dg_scalar(g, mesh: GradedMesh, m: int, y0: float = 0.0) -> np.ndarray:
    """DG(m) for the scalar ODE ``y' = g(t)``, ``y(0) = y0``, in a monomial basis.

    Returns an array ``(J, m+1)`` of monomial coefficients of ``y`` on each
    slab in the local variable ``s = (t - t_{j-1}) / tau_j``.
    """
    J = mesh.J
    out = np.zeros((J, m + 1))
    prev = y0
    k = np.arange(m + 1)
    for j in range(1, J + 1):
        a, b = mesh.slab(j)
        tau = b - a
        # test s^l, trial s^k: int_0^1 k s^(k-1) s^l ds + [k == 0][l == 0]
        S = np.zeros((m + 1, m + 1))
        for l in range(m + 1):
            for kk in range(m + 1):
                S[l, kk] = (kk / (kk + l) if kk > 0 else 0.0) + (1.0 if (kk == 0 and l == 0) else 0.0)
        rhs = np.array(
            [integrate.quad(lambda t, l=l: g(t) * ((t - a) / tau) ** l, a, b, epsabs=1e-15, epsrel=1e-13, limit=200)[0] for l in k]
        )
        rhs[0] += prev
        coef = np.linalg.solve(S, rhs)
        out[j - 1] = coef
        prev = float(coef.sum())
    return out


# }}}
