import math

import numpy as np
import pytest

from rotorflow import RegimeViolation, ZeroMode, layer_params, profile_G
from rotorflow.layer import (C_MINUS, C_PLUS, airy_integral, bl_velocity, default_rho_grid, key_quantity,
                             key_quantity_contour, layer_integral)
from rotorflow.radial import norms

SQ3 = math.sqrt(3.0)


def test_hand_example():
    p = layer_params(4.0, 1)
    assert p.beta == pytest.approx(complex(SQ3, -1.0), abs=1e-14)
    assert p.abs_beta == pytest.approx(2.0, abs=1e-14)
    assert p.lam == pytest.approx(C_PLUS / 2, abs=1e-15)
    assert p.lam**2 == pytest.approx(complex(1, SQ3) / 8, abs=1e-15)
    assert 1j * p.n * p.abs_beta * C_MINUS / (2 * p.alpha) == pytest.approx(complex(1, SQ3) / 8, abs=1e-15)


def test_sign_branch():
    assert layer_params(-4.0, 1).beta == pytest.approx(2 * C_PLUS, abs=1e-14)
    assert layer_params(4.0, -1).beta == pytest.approx(2 * C_PLUS, abs=1e-14)


def test_unit_rotations():
    assert abs(C_PLUS) == pytest.approx(1.0, abs=1e-16)
    assert abs(C_MINUS) == pytest.approx(1.0, abs=1e-16)


@pytest.mark.parametrize("alpha, n", [(0.0, 1), (10.0, 0)])
def test_zero_mode(alpha, n):
    with pytest.raises(ZeroMode):
        layer_params(alpha, n)


def test_regime():
    p = layer_params(100.0, 11)
    with pytest.raises(RegimeViolation):
        profile_G(p)
    with pytest.raises(RegimeViolation):
        key_quantity(layer_params(100.0, 3), profile_G(layer_params(100.0, 3)), kappa=0.2)


@pytest.fixture(scope="module")
def prof4():
    return profile_G(layer_params(1e4, 1))


def test_relation_and_airy_residuals(prof4):
    assert prof4.relation_residual() < 1e-9
    assert prof4.airy_residual() < 1e-9


def test_decay(prof4):
    rho = prof4.rho
    env = np.abs(prof4.G) * np.exp(rho)
    near = env[(rho >= 10) & (rho <= 20)].max()
    far = env[rho > 20].max()
    assert far <= near
    assert abs(prof4.C0 * prof4.G0) <= 1 + 1e-12


@pytest.mark.parametrize("alpha, n", [(10.0, 1), (1e3, 3), (1e6, 1), (-1e4, 2), (1e4, -5)])
def test_normalization(alpha, n):
    pr = profile_G(layer_params(alpha, n))
    assert abs(pr.C0 * pr.G0) <= 1 + 1e-12


def test_lambda_zero_endpoint():
    assert abs(airy_integral(0.0) - 1 / 3) < 1e-10
    # (1/c)(1/3) has modulus 1/3
    assert abs(airy_integral(0.0) / C_MINUS) == pytest.approx(1 / 3, abs=1e-10)


def test_key_quantity_bracket():
    p = layer_params(1e6, 1)
    pr = profile_G(p)
    ratio = abs(key_quantity(p, pr)) / p.abs_beta
    assert 0.05 <= ratio <= 5


@pytest.mark.parametrize("alpha, n", [(1e2, 1), (1e4, 3), (1e6, 40), (-1e3, 2)])
def test_key_quantity_two_routes(alpha, n):
    p = layer_params(alpha, n)
    pr = profile_G(p)
    assert key_quantity_contour(p, pr) == pytest.approx(key_quantity(p, pr), rel=1e-7)


def test_layer_integral_matches_parameters():
    p = layer_params(1e4, 2)
    assert layer_integral(p) == airy_integral(p.lam)
    assert layer_integral(p, default_rho_grid(0.01)) == pytest.approx(layer_integral(p), rel=1e-10)


def test_bl_velocity_zero_and_scaling(grid):
    p = layer_params(1e4, 1)
    pr = profile_G(p)
    assert bl_velocity(p, pr, 0.0, grid).magnitude == 0
    one = norms(bl_velocity(p, pr, 0.3 - 0.1j, grid))
    two = norms(bl_velocity(p, pr, 2 * (0.3 - 0.1j), grid))
    for a, b in zip(one.as_dict().values(), two.as_dict().values()):
        if isinstance(a, list):
            assert np.allclose(b, 2 * np.asarray(a), rtol=1e-12)
        else:
            assert b == pytest.approx(2 * a, rel=1e-12)


def test_bl_velocity_support(grid):
    p = layer_params(1e5, 1)
    v = bl_velocity(p, profile_G(p), 1.0, grid)
    dens = np.abs(v.v_r) ** 2 + np.abs(v.v_t) ** 2
    inside = grid.r <= 1 + 5 / p.abs_beta
    total = grid.integrate_r(dens)
    assert grid.integrate_r(np.where(inside, dens, 0.0)) / total > 0.95


def test_bl_velocity_divergence_free(grid):
    from rotorflow.radial import div_mode

    p = layer_params(1e3, 2)
    v = bl_velocity(p, profile_G(p), 1.0, grid)
    assert np.abs(div_mode(v)).max() < 1e-6 * v.magnitude * p.abs_beta
