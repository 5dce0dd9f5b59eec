import numpy as np
import pytest

from rotorflow import FlowSolution, ModeProfile, SymmetryViolation, TailNotNegligible, biot_savart, norms
from rotorflow.radial import (apply_H, div_mode, gradient_energy, gradient_lower_bound, power_tail, rot_mode,
                              streamfunction_green, synthesize_physical)


def profile(grid, n, v_r=None, v_t=None):
    z = np.zeros_like(grid.r)
    return ModeProfile(grid, n, z if v_r is None else v_r, z if v_t is None else v_t)


def n2_example(r):
    return (2j / 5) * (r**-3 - r**-4), (2 / 5) * r**-3 - (3 / 5) * r**-4


@pytest.mark.parametrize("n", [0, 1, 3])
def test_point_vortex_is_irrotational(grid, n):
    assert np.abs(rot_mode(profile(grid, n, v_t=1 / grid.r))).max() < 1e-9


def test_rigid_rotation(grid):
    assert np.allclose(rot_mode(profile(grid, 0, v_t=grid.r)), 2.0, atol=1e-10)


def test_rot_of_closed_form(grid):
    r = grid.r
    vr, vt = n2_example(r)
    assert np.allclose(rot_mode(profile(grid, 2, vr, vt)), r**-5, rtol=0, atol=1e-9)


def test_divergence_examples(grid):
    r = grid.r
    assert np.abs(div_mode(profile(grid, 5, v_r=1 / r))).max() < 1e-9
    assert np.allclose(div_mode(profile(grid, 0, v_r=r)), 2.0, atol=1e-10)
    vr, vt = n2_example(r)
    assert np.abs(div_mode(profile(grid, 2, vr, vt))).max() < 1e-9


def test_gradient_energy_point_vortex(grid):
    R = grid.R_max
    e = gradient_energy(profile(grid, 0, v_t=1 / grid.r))
    assert e == pytest.approx(2 * np.pi * (1 - R**-2), rel=1e-10)
    assert gradient_energy(profile(grid, 3)) == 0.0


@pytest.mark.parametrize("n", [1, 2, 5])
def test_gradient_lower_bound(grid, n):
    r = grid.r
    s = r - 1
    p = biot_savart(n, s * np.exp(-2 * s) * (1 + 0.3j * np.sin(r)), grid)
    assert gradient_energy(p, exterior=False) >= gradient_lower_bound(p) * (1 - 1e-12)


def test_green_closed_form(grid):
    r = grid.r
    psi = streamfunction_green(2, r**-5, grid)
    exact = (r**-2 - r**-3) / 5
    assert np.abs(psi - exact).max() <= 1e-10 * np.abs(exact).max()


def test_green_residual_n1(grid):
    r = grid.r
    omega = np.exp(-5 * (r - 1))
    psi = streamfunction_green(1, omega, grid)
    res = apply_H(1, psi, grid) - omega
    assert np.abs(res[1:-1]).max() < 1e-8


def test_zero_vorticity(grid):
    z = np.zeros_like(grid.r)
    assert np.all(streamfunction_green(3, z, grid) == 0)
    p = biot_savart(3, z, grid)
    assert p.magnitude == 0


def test_biot_savart_closed_form(grid):
    r = grid.r
    p = biot_savart(2, r**-5, grid)
    vr, vt = n2_example(r)
    scale = np.abs(vt).max()
    assert np.abs(p.v_r - vr).max() <= 1e-10 * scale
    assert np.abs(p.v_t - vt).max() <= 1e-10 * scale


@pytest.mark.parametrize("n", [1, 2, 4])
def test_biot_savart_round_trip(grid, n):
    r = grid.r
    s = r - 1
    psi = s**2 * np.exp(-2 * s)  # psi(1) = psi'(1) = 0
    dpsi = (2 * s - 2 * s**2) * np.exp(-2 * s)
    p = ModeProfile(grid, n, 1j * n * psi / r, -dpsi)
    q = biot_savart(n, rot_mode(p), grid)
    assert np.abs(q.v_r - p.v_r).max() < 1e-8
    assert np.abs(q.v_t - p.v_t).max() < 1e-8


def test_slow_tail_raises(grid):
    with pytest.raises(TailNotNegligible):
        streamfunction_green(1, np.cos(grid.r), grid)


def test_power_tail_exact_for_power_law(grid):
    r = grid.r
    R = grid.R_max
    # int_R^inf s^{-4} ds = R^{-3} / 3
    assert power_tail(r**-4.0, r) == pytest.approx(R**-3 / 3, rel=1e-9)


def test_scalar_norms(grid):
    rep = norms(np.exp(-(grid.r - 1)), grid)
    assert rep.l2**2 == pytest.approx(3 * np.pi / 2, rel=1e-10)


def test_mode0_linf(grid):
    r = grid.r
    rep = norms(profile(grid, 0, v_t=1 / r - 1 / r**2))
    # sampled maximum; the peak r = 2 falls between nodes
    assert rep.linf == pytest.approx(0.25, abs=1e-6)
    assert abs(r[np.argmax(np.abs(1 / r - 1 / r**2))] - 2) < 0.05
    assert rep.x0_parts[0] == rep.linf


def test_zero_norms(grid):
    rep = norms(FlowSolution.zeros(grid, 10.0, 3))
    assert rep.x0_norm == 0 and rep.l2 == 0 and rep.linf == 0


def test_synthesis(grid):
    r = grid.r
    s = r - 1
    w = s * np.exp(-2 * s) * (1 + 1j)
    p1 = biot_savart(1, w, grid)
    sol = FlowSolution(grid, 10.0, {0: profile(grid, 0, v_t=1 / r), 1: p1, -1: p1.conj()})
    _, theta, vr, vt = synthesize_physical(sol, 16)
    assert vr.shape == (len(r), 16)
    assert np.allclose(vt[:, 0], 1 / r + 2 * p1.v_t.real)

    axi = FlowSolution(grid, 10.0, {0: profile(grid, 0, v_t=1 / r)})
    _, _, vr0, vt0 = synthesize_physical(axi, 8)
    assert np.allclose(vt0, vt0[:, :1]) and np.all(vr0 == 0)

    broken = FlowSolution(grid, 10.0, {1: p1, -1: p1})
    with pytest.raises(SymmetryViolation):
        synthesize_physical(broken, 8)
