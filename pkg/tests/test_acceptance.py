"""The eleven acceptance criteria, each at its stated tolerance.

Every criterion prints one PASS/FAIL line (also repeated in the pytest
terminal summary). Run standalone with ``python tests/test_acceptance.py``.
"""

import math
import time

import numpy as np
import pytest

from rotorflow import airy_ai, airy_ai_prime, biot_savart, build_forcing, make_grid
from rotorflow.layer import airy_integral
from rotorflow.linear import solve_constructive, solve_mode0, solve_noslip_direct, solve_slip
from rotorflow.nonlinear import PicardSettings, axisym_gap, linear_mode0, multi_start, picard_solve
from rotorflow.radial import norms
from rotorflow.verify import (SCALING_EXPECTATIONS, bl_thickness_fit, energy_residuals, fit_loglog,
                              high_frequency_check, interpolation_check, near_wall_match, nondegeneracy_probe,
                              scaling_sweep, vorticity_energy_residuals)

from conftest import ACCEPTANCE_LINES

SWEEP_ALPHAS = [10.0 ** (2 + k / 2) for k in range(7)]  # 1e2, 10^2.5, ..., 1e5
RING = {"family": "gaussian_ring", "amplitude": 1.0}


def verdict(number, title, checks):
    """Print one line for the criterion, then fail the test if any check failed."""
    ok = all(passed for _, passed in checks)
    detail = "; ".join(f"{text}{'' if passed else ' [FAIL]'}" for text, passed in checks)
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2} ({title}): {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    failed = [text for text, passed in checks if not passed]
    assert ok, f"criterion {number} failed: {failed}"


def rel_l2(a, b, grid):
    return math.sqrt(grid.integrate_r(np.abs(a - b) ** 2) / grid.integrate_r(np.abs(b) ** 2))


# -- 1 ----------------------------------------------------------------------------------------------

def _airy_ode_residual(z, h=1e-2):
    c = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])
    step = h * z / np.abs(z)
    d = airy_ai_prime(z + np.arange(-4, 5)[:, None] * step)
    d2 = (c[:, None] * d).sum(axis=0) / step
    return np.abs(d2 - z * airy_ai(z)) / (1 + np.abs(airy_ai(z)))


def test_criterion_01_airy_core():
    t = time.perf_counter()
    e0 = abs(airy_ai(0.0) - 0.3550280538878172)
    e1 = abs(airy_ai_prime(0.0) + 0.2588194037928068)
    ei = abs(airy_integral(0.0) - 1 / 3)
    rho = np.linspace(0.05, 20.0, 400)
    ode = max(_airy_ode_residual(rho * np.exp(1j * th)).max()
              for th in (0.0, np.pi / 6, -np.pi / 6, np.pi / 3, -np.pi / 3))
    dt = time.perf_counter() - t
    verdict(1, "Airy core", [
        (f"|Ai(0) err| {e0:.1e} < 1e-12", e0 < 1e-12),
        (f"|Ai'(0) err| {e1:.1e} < 1e-12", e1 < 1e-12),
        (f"|int Ai - 1/3| {ei:.1e} < 1e-10", ei < 1e-10),
        (f"ODE residual {ode:.1e} < 1e-10", ode < 1e-10),
        (f"runtime {dt:.2f}s < 1s", dt < 1.0),
    ])


# -- 2 ----------------------------------------------------------------------------------------------

def test_criterion_02_closed_forms(grid):
    t = time.perf_counter()
    r = grid.r

    def rel(a, b):
        return float(np.abs(a - b).max() / np.abs(b).max())

    m1 = rel(solve_mode0(3 * r**-4, grid).v_t, 1 / r - 1 / r**2)
    m2 = rel(solve_mode0(r**-3, grid).v_t, np.log(r) / (2 * r))
    p = biot_savart(2, r**-5, grid)
    vr = (2j / 5) * (r**-3 - r**-4)
    vt = (2 / 5) * r**-3 - (3 / 5) * r**-4
    bs = max(rel(p.v_r, vr), rel(p.v_t, vt), rel(p.psi, (r**-2 - r**-3) / 5))
    dt = time.perf_counter() - t
    verdict(2, "closed forms", [
        (f"f=3r^-4 err {m1:.1e} < 1e-10", m1 < 1e-10),
        (f"f=r^-3 err {m2:.1e} < 1e-10", m2 < 1e-10),
        (f"n=2 Biot-Savart err {bs:.1e} < 1e-10", bs < 1e-10),
        (f"runtime {dt:.2f}s < 1s", dt < 1.0),
    ])


# -- 3 ----------------------------------------------------------------------------------------------

def _manufactured_error(M, alpha=10.0, n=1):
    # R_max = 40 so the manufactured force is negligible at the outer boundary
    g = make_grid(R_max=40.0, M=M)
    r = g.r
    s = r - 1
    w = s * np.exp(-s)
    rhs = -(s - 2) * np.exp(-s) - (1 - s) * np.exp(-s) / r + n * n * w / r**2 - 1j * alpha * n * (1 - 1 / r**2) * w
    _, omega = solve_slip(n, alpha, 1j * r * rhs / n, np.zeros_like(r), g)
    return rel_l2(omega, w, g)


def test_criterion_03_manufactured_slip():
    t = time.perf_counter()
    coarse = _manufactured_error(1024)
    fine = _manufactured_error(2048)
    order = math.log2(coarse / fine)
    dt = time.perf_counter() - t
    verdict(3, "manufactured slip solve", [
        (f"rel L2 error {fine:.1e} < 1e-6", fine < 1e-6),
        (f"order {order:.2f} >= 3.5 (M 1024->2048)", order >= 3.5),
        (f"runtime {dt:.2f}s < 5s", dt < 5.0),
    ])


# -- 4 and 5 -----------------------------------------------------------------------------------------

CROSS_CELLS = [(a, n) for a in (1e2, 1e3, 1e4) for n in (1, 2, 4)]


@pytest.fixture(scope="module")
def cross_solves(grid):
    t = time.perf_counter()
    out = []
    f = build_forcing({"family": "gaussian_ring", "modes": [1, 2, 4]}, grid)
    for alpha, n in CROSS_CELLS:
        f_r, f_t = f.mode(n)
        cs = solve_constructive(n, alpha, f_r, f_t, grid)
        direct = solve_noslip_direct(n, alpha, f_r, f_t, grid)
        _, omega = solve_slip(n, alpha, f_r, f_t, grid)
        out.append((alpha, n, f_r, f_t, cs, direct, omega))
    return out, time.perf_counter() - t


def test_criterion_04_cross_validation(cross_solves):
    solves, dt = cross_solves
    gaps = [norms(cs.noslip - d).l2 / norms(d).l2 for _, _, _, _, cs, d, _ in solves]
    worst = max(gaps)
    verdict(4, "constructive vs direct", [
        (f"max rel L2 gap {worst:.1e} < 1e-6 over {len(gaps)} cells", worst < 1e-6),
        (f"runtime {dt:.1f}s < 60s", dt < 60),
    ])


def test_criterion_05_energy_identities(cross_solves):
    solves, _ = cross_solves
    vel, vort, bracket, weighted = 0.0, 0.0, math.inf, 0.0
    for alpha, n, f_r, f_t, cs, direct, omega in solves:
        for v in (cs.noslip, direct):
            e = energy_residuals(n, alpha, v, f_r, f_t)
            vel = max(vel, e["real"], e["imag"], e["rotation"], e["key"])
            bracket = min(bracket, e["bracket"])
        ve = vorticity_energy_residuals(n, alpha, omega, f_r, f_t, cs.noslip.grid)
        vort = max(vort, ve["real"], ve["imag"])
        weighted = max(weighted, ve["weighted_bound"])
    verdict(5, "energy identities", [
        (f"velocity identities {vel:.1e} < 1e-7", vel < 1e-7),
        (f"vorticity identities {vort:.1e} < 1e-7", vort < 1e-7),
        (f"min coercive bracket {bracket:.3g} >= 0", bracket >= 0),
        (f"weighted vorticity bound ratio {weighted:.2f} <= 1", weighted <= 1),
    ])


# -- 6 ----------------------------------------------------------------------------------------------

def test_criterion_06_scaling_laws(grid):
    t = time.perf_counter()
    rep = scaling_sweep(SWEEP_ALPHAS, [1], RING, grid=grid)
    dt = time.perf_counter() - t
    checks = []
    for q, (expected, tol) in SCALING_EXPECTATIONS.items():
        fit = rep.fits[q]
        checks.append((f"{q} slope {fit.slope:+.3f} vs {expected:+.3f}+-{tol} (R^2 {fit.r2:.4f})", bool(fit.passed)))
    checks.append((f"runtime {dt:.0f}s < 600s", dt < 600))
    verdict(6, "scaling laws, Gaussian ring", checks)


# -- 7 ----------------------------------------------------------------------------------------------

def test_criterion_07_boundary_layer(grid):
    pairs = [(a, 1) for a in SWEEP_ALPHAS] + [(1e4, 2), (1e4, 4)]
    fit = bl_thickness_fit(pairs, source="assembled", grid=grid, tolerance=0.05).fits["thickness"]
    cells = [(a, n) for a in (1e4, 1e5, 1e6) for n in (1, 2)]
    match = max(near_wall_match(a, n, grid) for a, n in cells)
    verdict(7, "boundary layer", [
        (f"thickness slope {fit.slope:+.3f} vs -1/3+-0.05 (R^2 {fit.r2:.4f})", bool(fit.passed)),
        (f"near-wall chi vs Airy profile {match:.2%} <= 5% (|beta| >= 20)", match <= 0.05),
    ])


# -- 8 ----------------------------------------------------------------------------------------------

def test_criterion_08_nondegeneracy():
    rep = nondegeneracy_probe()
    verdict(8, "nondegeneracy", [
        (f"min |key|/|beta| {rep.min_key:.4f} > 0 over {len(rep.rows)} samples", rep.min_key > 0),
        (f"min radial-grid |key|/|beta| {rep.min_radial_key:.4f} > 0", rep.min_radial_key > 0),
        (f"refinement drift {rep.drift:.1e} <= 20%", rep.drift <= 0.2),
    ])


# -- 9 ----------------------------------------------------------------------------------------------

def test_criterion_09_high_frequency(grid):
    rep = high_frequency_check(10.0, (8, 16, 32), grid=grid)
    env = max(r["envelope_ratio"] for r in rep.rows)
    n2 = [r["n2_l2"] for r in rep.rows]
    agree = max(max(r["slip_over_noslip"], 1 / r["slip_over_noslip"]) for r in rep.rows)
    verdict(9, "high-frequency regime", [
        (f"||v_n|| / envelope {env:.3f} <= 3", env <= 3),
        (f"spread of n^2 ||v_n|| {max(n2) / min(n2):.2f} <= 3", max(n2) / min(n2) <= 3),
        (f"slip/noslip factor {agree:.3f} <= 2", agree <= 2),
    ])


# -- 10 ---------------------------------------------------------------------------------------------

def test_criterion_10_nonlinear(grid):
    t = time.perf_counter()
    tol_fp, tol_res = 1e-10, 1e-7
    settings = PicardSettings(tol_fp=tol_fp, tol_res=tol_res)
    f = build_forcing({"family": "gaussian_ring", "modes": [0, 1], "amplitude": 0.5}, grid)
    checks = []
    for alpha in (1e3, 1e4):
        ms = multi_start(alpha, f, settings=settings)
        traces = [tr for _, tr in ms.runs.values()]
        ratio = max(x for tr in traces for x in tr.ratio if math.isfinite(x))
        res = max(tr.residual[-1] for tr in traces)
        gap = ms.max_gap
        checks += [(f"alpha={alpha:g}: ratio {ratio:.2e} < 1", ratio < 1),
                   (f"residual {res:.1e} < 1e-7", res < tol_res),
                   (f"multi-start gap {gap:.1e} <= 1e-9", gap <= 10 * tol_fp)]
    v0 = linear_mode0(f)
    gaps = [axisym_gap(picard_solve(a, f, settings=settings)[0], v0) for a in SWEEP_ALPHAS]
    fit = fit_loglog(SWEEP_ALPHAS, gaps, "axisym_gap", -0.5, 0.15)
    checks.append(("gap decreasing in alpha", bool(np.all(np.diff(gaps) < 0))))
    checks.append((f"gap slope {fit.slope:+.3f} vs -0.5+-0.15 (R^2 {fit.r2:.4f})", bool(fit.passed)))
    dt = time.perf_counter() - t
    checks.append((f"runtime {dt:.0f}s < 600s", dt < 600))
    verdict(10, "nonlinear Picard", checks)


# -- 11 ---------------------------------------------------------------------------------------------

def test_criterion_11_interpolation():
    rep = interpolation_check(1000)
    verdict(11, "interpolation inequality", [
        (f"max ratio {rep.max_ratio:.4f} <= frozen {rep.constant}", rep.within_bound),
        (f"homogeneity error {rep.homogeneity_error:.1e} < 1e-12", rep.homogeneity_error < 1e-12),
    ])


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
