import numpy as np
import pytest

from rotorflow import GradingInsufficient, make_grid
from rotorflow.grid import bl_width, diff_matrix, sinh_nodes


def test_uniform_limit():
    assert np.array_equal(sinh_nodes(2.0, 1, 0.0), [1.0, 2.0])
    assert np.allclose(sinh_nodes(2.0, 1, 1e-9), [1.0, 2.0])
    assert np.allclose(sinh_nodes(5.0, 8, 0.0), np.linspace(1, 5, 9))


def test_layer_resolution(grid):
    g = make_grid(R_max=30.0, M=2048, sigma=6.0, delta_bl=0.05)
    assert g.count_below(1.05) >= 8
    assert g.r[0] == 1.0 and g.r[-1] == 30.0
    assert np.all(np.diff(grid.r) > 0)


def test_grading_insufficient():
    with pytest.raises(GradingInsufficient):
        make_grid(R_max=30.0, M=16, sigma=0.1, delta_bl=1e-3)


@pytest.mark.parametrize("bad", [dict(R_max=1.0), dict(M=8), dict(order=3)])
def test_rejects_bad_parameters(bad):
    with pytest.raises(ValueError):
        make_grid(**bad)


@pytest.mark.parametrize("degree", range(0, 6))
def test_quadrature_exact_for_polynomials(degree):
    g = make_grid(R_max=4.0, M=64, sigma=2.0)
    exact = (4.0 ** (degree + 1) - 1.0) / (degree + 1)
    assert g.integrate(g.r**degree) == pytest.approx(exact, rel=1e-12)


def test_quadrature_converges_on_smooth_integrand(grid):
    exact = 1.0 - np.exp(-29.0)  # int_1^30 e^{-(r-1)} dr
    assert grid.integrate(np.exp(-(grid.r - 1))) == pytest.approx(exact, rel=1e-11)


def test_cumulative_pieces_add_up(grid):
    g = np.exp(-(grid.r - 1)) * np.cos(grid.r)
    total = grid.integrate(g)
    assert np.allclose(grid.cumulative(g) + grid.cumulative_tail(g), total, atol=1e-14)
    assert grid.cumulative(g)[0] == 0.0


def test_derivatives_of_polynomials():
    g = make_grid(R_max=6.0, M=128, sigma=3.0)
    r = g.r
    assert np.allclose(g.d1(r**3), 3 * r**2, rtol=1e-10)
    assert np.allclose(g.d2(r**3), 6 * r, rtol=1e-9)
    D = diff_matrix(r, 1, 6)
    assert np.allclose(D @ r**5, 5 * r**4, rtol=1e-9)


def test_layer_width():
    assert bl_width(4.0, 1) == pytest.approx(0.5)
    assert bl_width(-4.0, 1) == bl_width(4.0, -1) == bl_width(4.0, 1)


def test_manifest_is_reproducible(grid):
    assert make_grid().to_json() == grid.to_json()
