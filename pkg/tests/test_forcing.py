import numpy as np
import pytest

from rotorflow import build_forcing, gaussian_ring, zero_forcing
from rotorflow.forcing import layer_ring
from rotorflow.grid import bl_width


def test_ring_is_unit_and_real(grid):
    f = gaussian_ring(grid, modes=(0, 1, 3))
    assert f.mode_indices == [-3, -1, 0, 1, 3]
    for n in f.mode_indices:
        assert f.mode_l2(n) == pytest.approx(1.0, rel=1e-13)
        assert np.all(f.mode(n)[0] == 0)
    assert f.is_conjugate_symmetric()


def test_ring_shape(grid):
    f = gaussian_ring(grid, amplitude=2.0)
    ft = f.mode(1)[1].real
    assert grid.r[np.argmax(ft)] == pytest.approx(2.0, abs=0.02)
    assert f.mode_l2(1) == pytest.approx(2.0, rel=1e-13)


def test_mode0_amplitude(grid):
    f = gaussian_ring(grid, modes=(0, 1), mode0_amplitude=0.1)
    assert f.mode_l2(0) == pytest.approx(0.1, rel=1e-12)
    l1, l2 = f.y_norm
    assert l2 == pytest.approx(np.sqrt(2.0), rel=1e-12) and l1 > 0


def test_layer_ring_follows_layer(grid):
    for alpha in (1e3, 1e5):
        f = layer_ring(grid, alpha)
        peak = grid.r[np.argmax(f.mode(1)[1].real)] - 1
        assert peak == pytest.approx(2 * bl_width(alpha, 1), rel=0.05)
        assert f.mode_l2(1) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        layer_ring(grid, 1e3, modes=(0,))


def test_recipes_rebuild(grid):
    f = gaussian_ring(grid, modes=(2,), center=3.0)
    g = build_forcing(f.recipe, grid)
    assert np.array_equal(f.mode(2)[1], g.mode(2)[1])
    assert build_forcing({"family": "zero"}, grid).modes == zero_forcing(grid).modes
    with pytest.raises(ValueError):
        build_forcing({"family": "nonlinear"}, grid)


def test_arithmetic(grid):
    f = gaussian_ring(grid)
    h = f.combine(f.scaled(2.0), 1.0, -0.5)
    assert np.abs(h.mode(1)[1]).max() == 0
    assert not type(f)(grid, {1: f.mode(1)}).is_conjugate_symmetric()
