import math

import numpy as np
import pytest
from scipy import integrate

from fracdg.fem1d import _scatter_local, assemble, l2_error, l2_norm, load_vector, ritz_project
from fracdg.mesh import SpatialPartition


def sine(x):
    return np.sin(np.pi * x)


def random_sine_series(rng, modes=5):
    a = rng.standard_normal(modes) / np.arange(1, modes + 1) ** 2
    k = np.arange(1, modes + 1) * np.pi

    def v(x):
        return np.sin(np.multiply.outer(np.asarray(x, float), k)) @ a

    def dv(x):
        return np.cos(np.multiply.outer(np.asarray(x, float), k)) @ (a * k)

    return v, dv


def test_linear_stencils():
    fem = assemble(SpatialPartition(0.0, 1.0, 4), 1)
    assert fem.ndof == 3
    tri = np.diag([2.0] * 3) - np.diag([1.0] * 2, 1) - np.diag([1.0] * 2, -1)
    np.testing.assert_allclose(fem.stiffness, tri / 0.25, atol=1e-13)
    tri = np.diag([4.0] * 3) + np.diag([1.0] * 2, 1) + np.diag([1.0] * 2, -1)
    np.testing.assert_allclose(fem.mass, tri * 0.25 / 6, atol=1e-15)


def test_cubic_matrices_against_quadrature():
    fem = assemble(SpatialPartition(0.0, 1.0, 2), 3)
    assert fem.ndof == 5

    def entry(k, l, deriv):
        total = 0.0
        for cell in range(2):
            lo, hi = cell * 0.5, (cell + 1) * 0.5

            def f(x):
                e, val, der = fem.basis_at(np.array([x]))
                data = der if deriv else val
                glob = fem.cell_dofs(int(e[0]))
                vk = data[list(glob).index(k), 0] if k in glob else 0.0
                vl = data[list(glob).index(l), 0] if l in glob else 0.0
                return vk * vl

            total += integrate.quad(f, lo + 1e-14, hi - 1e-14, epsabs=1e-14)[0]
        return total

    for k in range(5):
        for l in range(5):
            assert fem.stiffness[k, l] == pytest.approx(entry(k, l, True), abs=1e-11)
            assert fem.mass[k, l] == pytest.approx(entry(k, l, False), abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_matrices_symmetric_positive_definite(n):
    fem = assemble(SpatialPartition(0.0, 1.0, 5), n)
    for mat in (fem.mass, fem.stiffness):
        np.testing.assert_allclose(mat, mat.T, atol=1e-14)
        assert np.linalg.eigvalsh(mat).min() > 0
    assert fem.banded(fem.stiffness).shape == (n + 1, fem.ndof)


def test_rejects_degree():
    with pytest.raises(ValueError):
        assemble(SpatialPartition(), 4)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_basis_vanishes_on_boundary(n):
    fem = assemble(SpatialPartition(0.0, 1.0, 3), n)
    for k in range(fem.ndof):
        e = np.zeros(fem.ndof)
        e[k] = 1.0
        np.testing.assert_allclose(fem.evaluate(e, [0.0, 1.0]), 0.0, atol=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_ritz_identity_on_space(n):
    fem = assemble(SpatialPartition(0.0, 1.0, 4), n)
    for k in range(fem.ndof):
        e = np.zeros(fem.ndof)
        e[k] = 1.0
        c = ritz_project(fem, lambda x: fem.evaluate(e, x))
        np.testing.assert_allclose(c, e, atol=1e-12)
        assert l2_error(fem, c, lambda x: fem.evaluate(e, x)) < 1e-13


def test_ritz_nodal_values_linear():
    fem = assemble(SpatialPartition(0.0, 1.0, 4), 1)
    c = ritz_project(fem, sine)
    np.testing.assert_allclose(c, sine(np.array([0.25, 0.5, 0.75])), atol=1e-13)


def test_ritz_reproduces_quadratic():
    fem = assemble(SpatialPartition(0.0, 1.0, 4), 2)
    c = ritz_project(fem, lambda x: x * (1 - x))
    np.testing.assert_allclose(c, fem.dof_coords * (1 - fem.dof_coords), atol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("cells", [3, 8, 17])
def test_ritz_nodal_exactness(n, cells):
    fem = assemble(SpatialPartition(0.0, 1.0, cells), n)
    v, _ = random_sine_series(np.random.default_rng(cells * 10 + n))
    c = ritz_project(fem, v)
    vertices = np.linspace(0, 1, cells + 1)[1:-1]
    np.testing.assert_allclose(fem.evaluate(c, vertices), v(vertices), atol=1e-11)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_galerkin_orthogonality(n):
    rng = np.random.default_rng(n)
    fem = assemble(SpatialPartition(0.0, 1.0, 6), n)
    x, w = fem.quadrature(2 * n + 20)
    e, _, der = fem.basis_at(x)
    for _ in range(50):
        v, dv = random_sine_series(rng)
        c = ritz_project(fem, v)
        resid = (dv(x) - _deriv(fem, c, x)) * w
        # (d(v - R_h v)/dx, d psi_l/dx) for every interior psi_l
        out = _scatter_local(fem, e, der * resid[None, :])
        assert np.abs(out).max() < 1e-10


def _deriv(fem, c, x):
    e, _, der = fem.basis_at(x)
    return np.einsum("ax,ax->x", der, fem._gather(c, e))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_ritz_with_derivative_matches_by_parts(n):
    fem = assemble(SpatialPartition(0.0, 1.0, 7), n)
    v, dv = random_sine_series(np.random.default_rng(3))
    np.testing.assert_allclose(ritz_project(fem, v), ritz_project(fem, v, dv=dv), atol=1e-12)


def ritz_errors(n, cells):
    fem = assemble(SpatialPartition(0.0, 1.0, cells), n)
    c = ritz_project(fem, sine)
    l2 = l2_error(fem, c, sine, degree=2 * n + 10)
    x, w = fem.quadrature(2 * n + 10)
    h1 = math.sqrt(np.dot(w, (_deriv(fem, c, x) - np.pi * np.cos(np.pi * x)) ** 2))
    return l2, h1


@pytest.mark.parametrize("n", [1, 2, 3])
def test_ritz_convergence_rates(n):
    cells = [4, 8, 16, 32]
    errs = np.array([ritz_errors(n, c) for c in cells])
    rates = np.log2(errs[:-1] / errs[1:])
    assert rates[-1, 0] == pytest.approx(n + 1, abs=0.1)
    assert rates[-1, 1] == pytest.approx(n, abs=0.1)


def test_norms():
    fem = assemble(SpatialPartition(0.0, 1.0, 16), 3)
    for k in (0, 5, fem.ndof - 1):
        e = np.zeros(fem.ndof)
        e[k] = 1.0
        assert l2_norm(fem, e) == pytest.approx(math.sqrt(fem.mass[k, k]), rel=1e-14)
    zero = np.zeros(fem.ndof)
    assert l2_error(fem, zero, sine) == pytest.approx(1 / math.sqrt(2), rel=1e-12)


def test_load_vector_against_quadrature():
    fem = assemble(SpatialPartition(0.0, 1.0, 4), 2)
    g = lambda x: np.exp(x) * np.sin(3 * x)  # noqa: E731
    b = load_vector(fem, g, degree=30)
    for k in range(fem.ndof):
        e = np.zeros(fem.ndof)
        e[k] = 1.0
        ref = sum(
            integrate.quad(lambda x: g(x) * fem.evaluate(e, np.array([x]))[0], lo, lo + 0.25, epsabs=1e-15)[0]
            for lo in (0.0, 0.25, 0.5, 0.75)
        )
        assert b[k] == pytest.approx(ref, abs=1e-13)


def test_evaluate_with_trailing_axes():
    fem = assemble(SpatialPartition(0.0, 1.0, 5), 2)
    C = np.random.default_rng(0).standard_normal((fem.ndof, 3))
    x = np.linspace(0, 1, 11)
    stacked = fem.evaluate(C, x)
    assert stacked.shape == (11, 3)
    np.testing.assert_allclose(stacked[:, 1], fem.evaluate(C[:, 1], x))
