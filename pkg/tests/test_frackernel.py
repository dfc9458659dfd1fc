import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from fracdg.frackernel import (
    FracOrder,
    FractionalKernel,
    diagonal_block,
    history_block,
    rl_derivative_of_power,
    rl_integral_of_slab_poly,
)
from fracdg.mesh import make_graded_mesh
from fracdg.oracle import brute_force_kernel_block
from fracdg.polybasis import TimeBasis


def l1_closed_form(t, j, i, gamma):
    g = 1 - gamma
    if i == j:
        return (t[j] - t[j - 1]) ** g / math.gamma(2 - gamma)
    return ((t[j] - t[i - 1]) ** g - (t[j] - t[i]) ** g - (t[j - 1] - t[i - 1]) ** g + (t[j - 1] - t[i]) ** g) / math.gamma(
        2 - gamma
    )


@pytest.mark.parametrize("gamma", [0.0, 1.0, -0.2, 1.5])
def test_frac_order_range(gamma):
    with pytest.raises(ValueError):
        FracOrder(gamma)


def test_potential_at_slab_end():
    mesh = make_graded_mesh(1.0, 5, 2.0)
    for gamma in (0.2, 0.5, 0.8):
        tau = mesh.width(3)
        val = rl_integral_of_slab_poly(gamma, mesh, 3, 0, mesh.nodes[3])
        assert val == pytest.approx(tau ** (1 - gamma) / math.gamma(2 - gamma), rel=1e-13)


def test_potential_vanishes_at_slab_start():
    mesh = make_graded_mesh(1.0, 5, 1.0)
    a = mesh.nodes[2]
    assert rl_integral_of_slab_poly(0.5, mesh, 3, 0, a) == 0.0
    assert abs(rl_integral_of_slab_poly(0.5, mesh, 3, 0, a + 1e-12)) < 1e-5


@pytest.mark.parametrize("t_frac", [0.5, 1.0, 1.7, 2.5])
@pytest.mark.parametrize("p", [0, 1, 2])
def test_potential_matches_quadrature(t_frac, p):
    gamma = 0.5
    mesh = make_graded_mesh(2.0, 4, 1.5)
    a, b = mesh.slab(2)
    t = a + t_frac * (b - a)
    basis = TimeBasis(p)

    def v(s):
        return basis.eval(p, (s - a) / (b - a))

    if t <= b:
        ref, _ = integrate.quad(v, a, t, weight="alg", wvar=(0.0, -gamma), epsabs=1e-14)
    else:
        ref, _ = integrate.quad(lambda s: v(s) * (t - s) ** -gamma, a, b, epsabs=1e-14)
    ref /= math.gamma(1 - gamma)
    assert rl_integral_of_slab_poly(gamma, mesh, 2, p, t) == pytest.approx(ref, abs=1e-12)


def test_potential_rejects_early_times():
    mesh = make_graded_mesh(1.0, 4)
    with pytest.raises(ValueError):
        rl_integral_of_slab_poly(0.5, mesh, 2, 0, 0.1)


def test_semigroup_of_potentials():
    # I^g (I^d v) = I^(g + d) v for v = chi_{I_1}
    g, d = 0.3, 0.4
    mesh = make_graded_mesh(1.0, 4, 1.0)
    t1 = mesh.nodes[1]

    def inner(s):
        return rl_integral_of_slab_poly(1 - d, mesh, 1, 0, s) if s > 0 else 0.0

    for t in np.linspace(0.02, 1.0, 20):
        parts = [(0.0, min(t, t1))] + ([(t1, t)] if t > t1 else [])
        total = 0.0
        for lo, hi in parts:
            wvar = (0.0, g - 1) if hi == t else (0.0, 0.0)
            if hi == t:
                val, _ = integrate.quad(inner, lo, hi, weight="alg", wvar=wvar, epsabs=1e-13, epsrel=1e-12, limit=200)
            else:
                val, _ = integrate.quad(lambda s: inner(s) * (t - s) ** (g - 1), lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)
            total += val
        total /= math.gamma(g)
        assert total == pytest.approx(rl_integral_of_slab_poly(1 - g - d, mesh, 1, 0, t), abs=1e-8)


def test_rl_derivative_examples():
    assert rl_derivative_of_power(0.5, 1.0, 1.0) == pytest.approx(1.1283791671, rel=1e-10)
    for gamma in (0.2, 0.7):
        assert rl_derivative_of_power(gamma, 0.0, 1.0) == pytest.approx(1 / math.gamma(1 - gamma), rel=1e-14)
    assert rl_derivative_of_power(0.2, 4.0, 0.5) == pytest.approx(24 / math.gamma(4.8) * 0.5**3.8, rel=1e-14)


def test_rl_derivative_by_numerical_differentiation():
    # D^0.5 t = d/dt I^0.5 t, with I^0.5 t from quadrature
    def half_integral(t):
        val, _ = integrate.quad(lambda s: s, 0, t, weight="alg", wvar=(0.0, -0.5), epsabs=1e-15)
        return val / math.gamma(0.5)

    h = 1e-4
    fd = (half_integral(1 + h) - half_integral(1 - h)) / (2 * h)
    assert fd == pytest.approx(rl_derivative_of_power(0.5, 1.0, 1.0), rel=1e-8)


def test_rl_derivative_rejects():
    with pytest.raises(ValueError):
        rl_derivative_of_power(0.5, -0.6, 1.0)
    with pytest.raises(ValueError):
        rl_derivative_of_power(0.5, 1.0, 0.0)


def test_history_block_examples():
    mesh = make_graded_mesh(3.0, 3, 1.0)  # tau = 1
    assert history_block(0.5, mesh, 0, 2, 2).entries[0, 0] == pytest.approx(1.1283791671, rel=1e-10)
    assert history_block(0.5, mesh, 0, 2, 1).entries[0, 0] == pytest.approx(
        (2**0.5 - 2) / math.gamma(1.5), abs=1e-12
    )
    # the quoted decimal -0.6609901 carries a slip in its sixth digit
    assert history_block(0.5, mesh, 0, 2, 1).entries[0, 0] == pytest.approx(-0.66098921, abs=1e-8)


@pytest.mark.parametrize("sigma", [1.0, 2.0, 3.5])
@pytest.mark.parametrize("gamma", [0.2, 0.5, 0.8])
def test_degree_zero_closed_forms(sigma, gamma):
    mesh = make_graded_mesh(1.0, 10, sigma)
    kern = FractionalKernel(gamma, mesh, 0)
    for j in range(1, 11):
        for i in range(1, j + 1):
            assert kern.block(j, i)[0, 0] == pytest.approx(l1_closed_form(mesh.nodes, j, i, gamma), abs=1e-12)


@given(tau=st.floats(1e-6, 10.0), gamma=st.floats(0.05, 0.95))
def test_diagonal_scaling(tau, gamma):
    np.testing.assert_allclose(diagonal_block(gamma, tau, 2), tau ** (1 - gamma) * diagonal_block(gamma, 1.0, 2), rtol=1e-13)


@pytest.mark.parametrize("c", [0.5, 2.0, 10.0])
def test_uniform_mesh_scaling(c):
    unit = FractionalKernel(0.3, make_graded_mesh(1.0, 6), 2)
    scaled = FractionalKernel(0.3, make_graded_mesh(c, 6), 2)
    for j in range(1, 7):
        np.testing.assert_allclose(scaled.row(j), c**0.7 * unit.row(j), rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("m", [3, 4])
def test_higher_degree_against_oracle(m):
    mesh = make_graded_mesh(1.0, 5, 2.0)
    kern = FractionalKernel(0.6, mesh, m)
    for j, i in [(5, 5), (5, 4), (5, 3), (4, 1)]:
        np.testing.assert_allclose(kern.block(j, i), brute_force_kernel_block(0.6, mesh, m, j, i), atol=1e-10)


def test_history_block_matches_kernel_row():
    mesh = make_graded_mesh(1.0, 6, 2.0)
    kern = FractionalKernel(0.4, mesh, 1)
    for j, i in [(6, 6), (6, 5), (6, 1), (3, 2)]:
        hb = history_block(0.4, mesh, 1, j, i)
        assert (hb.j, hb.i) == (j, i)
        np.testing.assert_allclose(hb.entries, kern.block(j, i), atol=1e-13)


def test_history_block_index_checks():
    mesh = make_graded_mesh(1.0, 4)
    with pytest.raises(IndexError):
        history_block(0.5, mesh, 0, 2, 3)
    with pytest.raises(IndexError):
        history_block(0.5, mesh, 0, 5, 1)
    with pytest.raises(IndexError):
        FractionalKernel(0.5, mesh, 0).block(2, 0)


def test_uniform_rows_are_toeplitz_and_readonly():
    mesh = make_graded_mesh(1.0, 8)
    kern = FractionalKernel(0.5, mesh, 1)
    row8, row5 = kern.row(8), kern.row(5)
    np.testing.assert_array_equal(row5, row8[3:])
    with pytest.raises(ValueError):
        row8[0, 0, 0] = 1.0


def test_concurrent_rows_agree():
    mesh = make_graded_mesh(1.0, 16, 2.0)
    kern = FractionalKernel(0.5, mesh, 1)
    with ThreadPoolExecutor(4) as pool:
        rows = list(pool.map(kern.row, [16, 16, 9, 16, 9]))
    fresh = FractionalKernel(0.5, mesh, 1)
    np.testing.assert_array_equal(rows[0], fresh.row(16))
    np.testing.assert_array_equal(rows[2], fresh.row(9))


def random_path_form(gamma, mesh, m, rng, draws):
    G = FractionalKernel(gamma, mesh, m).assembled()
    C = rng.standard_normal((draws, G.shape[0]))
    return np.einsum("ni,ij,nj->n", C, G, C), G


@pytest.mark.parametrize("sigma", [1.0, 2.0])
@pytest.mark.parametrize("m", [0, 1, 2])
def test_quadratic_form_positive(sigma, m):
    rng = np.random.default_rng(11)
    for gamma in (0.2, 0.5, 0.8):
        values, G = random_path_form(gamma, make_graded_mesh(1.0, 8, sigma), m, rng, 1000)
        assert np.all(values > 0)
        assert np.linalg.eigvalsh(0.5 * (G + G.T)).min() > 0
