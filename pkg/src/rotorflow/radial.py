"""Polar-coordinate calculus per Fourier mode, Biot-Savart reconstruction and norms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotIntegrable, SymmetryViolation, TailNotNegligible
from .fields import FlowSolution, ModeProfile
from .grid import RadialGrid

TAIL_NEGLIGIBLE = 1e-12
TAIL_NODES = 5
TWO_PI = 2.0 * np.pi


def power_tail(g: np.ndarray, r: np.ndarray, k: float = 0.0, *, tol: float = TAIL_NEGLIGIBLE,
               name: str = "profile") -> complex:
    """Estimate int_R^inf s^k g(s) ds from the last nodes.

    Zero when g is negligible at R; exact when g is a pure power law there;
    otherwise TailNotNegligible. A power law too slow to integrate raises
    NotIntegrable.
    """
    scale = np.abs(g).max()
    if scale == 0.0 or abs(g[-1]) <= tol * scale:
        return 0.0
    gt = g[-TAIL_NODES:]
    rt = r[-TAIL_NODES:]
    if np.any(gt == 0):
        raise TailNotNegligible(f"{name}: irregular tail at R_max")
    phase = gt / np.abs(gt)
    slopes = np.diff(np.log(np.abs(gt))) / np.diff(np.log(rt))
    if np.abs(phase - phase[-1]).max() > 1e-9 or np.ptp(slopes) > 1e-6 * max(1.0, abs(slopes[-1])):
        raise TailNotNegligible(f"{name}: |g(R_max)|/max|g| = {abs(g[-1]) / scale:.2e}, not a power law")
    p = -slopes[-1]
    if p - k <= 1.0:
        raise NotIntegrable(f"{name}: tail decays like r^{-p:.3g}, s^{k:g} g not integrable")
    R = r[-1]
    return g[-1] * R ** (k + 1) / (p - k - 1.0)


def rot_mode(p: ModeProfile) -> np.ndarray:
    """omega_n = (1/r)(r v_t)' - (i n / r) v_r."""
    r = p.grid.r
    return p.grid.d1(p.v_t) + p.v_t / r - 1j * p.n * p.v_r / r


def div_mode(p: ModeProfile) -> np.ndarray:
    """(1/r)(r v_r)' + (i n / r) v_t."""
    r = p.grid.r
    return p.grid.d1(p.v_r) + p.v_r / r + 1j * p.n * p.v_t / r


def apply_H(n: int, psi: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """H_n psi = -psi'' - psi'/r + n^2 psi / r^2."""
    r = grid.r
    return -grid.d2(psi) - grid.d1(psi) / r + n * n * psi / r**2


def _green(n: int, omega: np.ndarray, grid: RadialGrid, tol: float):
    m = abs(n)
    r = grid.r
    w = np.asarray(omega, dtype=complex)
    inner = grid.cumulative(r ** (1 + m) * w)
    outer = grid.cumulative_tail(r ** (1 - m) * w)
    outer = outer + power_tail(w, r, 1 - m, tol=tol, name=f"omega (n={n})")
    d = outer[0]
    rm = r ** (-m)
    psi = (-d * rm + rm * inner + r**m * outer) / (2 * m)
    dpsi = 0.5 * (d * rm / r - rm / r * inner + r ** (m - 1) * outer)
    psi[0] = 0.0
    ext = None
    if abs(outer[-1]) == 0.0:
        ext = (inner[-1] - d) / (2 * m)
    return psi, dpsi, ext


def streamfunction_green(n: int, omega: np.ndarray, grid: RadialGrid, *,
                         tol: float = TAIL_NEGLIGIBLE) -> np.ndarray:
    """Decaying solution of H_n psi = omega with psi(1) = 0 via the Green formula."""
    if n == 0:
        raise ValueError("streamfunction_green needs n != 0")
    return _green(n, omega, grid, tol)[0]


def biot_savart(n: int, omega: np.ndarray, grid: RadialGrid, *, tol: float = TAIL_NEGLIGIBLE,
                kind: str = "slip") -> ModeProfile:
    """Velocity (i n psi / r, -psi') of the Green streamfunction; psi' by quadrature."""
    if n == 0:
        raise ValueError("biot_savart needs n != 0")
    psi, dpsi, ext = _green(n, omega, grid, tol)
    v_r = 1j * n * psi / grid.r
    return ModeProfile(grid, n, v_r, -dpsi, omega=np.asarray(omega, dtype=complex), psi=psi,
                       exterior=ext, kind=kind)


def velocity_from_psi(n: int, psi: np.ndarray, dpsi: np.ndarray, grid: RadialGrid, **kw) -> ModeProfile:
    return ModeProfile(grid, n, 1j * n * psi / grid.r, -dpsi, psi=psi, **kw)


# -- quadratic functionals ---------------------------------------------------

def _tail_terms(p: ModeProfile) -> dict[str, float]:
    """Contributions of the harmonic continuation psi = c r^(-m) beyond R."""
    zero = dict.fromkeys(("vr2", "vt2", "vr_r2", "vt_r2", "grad2", "wvr2", "wvt2"), 0.0)
    if p.exterior is None or p.n == 0 or p.exterior == 0:
        return zero
    m = abs(p.n)
    c2 = abs(p.exterior) ** 2
    R = p.grid.R_max
    a = TWO_PI * m * m * c2 * R ** (-2 * m) / (2 * m)
    b = TWO_PI * m * m * c2 * R ** (-2 * m - 2) / (2 * m + 2)
    return {"vr2": a, "vt2": a, "vr_r2": b, "vt_r2": b,
            "grad2": 4 * np.pi * m * m * (m + 1) * c2 * R ** (-2 * m - 2),
            "wvr2": a - b, "wvt2": a - b}


def component_norms_sq(p: ModeProfile) -> dict[str, float]:
    """Squared L2 norms (with the exterior tail) used by the energy identities."""
    g = p.grid
    r = g.r
    vr2 = np.abs(p.v_r) ** 2
    vt2 = np.abs(p.v_t) ** 2
    weight = 1.0 - 1.0 / r**2
    out = {
        "vr2": TWO_PI * g.integrate_r(vr2),
        "vt2": TWO_PI * g.integrate_r(vt2),
        "vr_r2": TWO_PI * g.integrate_r(vr2 / r**2),
        "vt_r2": TWO_PI * g.integrate_r(vt2 / r**2),
        "grad2": gradient_energy(p, exterior=False),
        "wvr2": TWO_PI * g.integrate_r(weight * vr2),
        "wvt2": TWO_PI * g.integrate_r(weight * vt2),
    }
    tail = _tail_terms(p)
    return {k: float(out[k] + tail[k]) for k in out}


def gradient_density(p: ModeProfile) -> np.ndarray:
    g = p.grid
    r = g.r
    n = p.n
    dr = g.d1(p.v_r)
    dt = g.d1(p.v_t)
    return (np.abs(dr) ** 2 + (1 + n * n) / r**2 * np.abs(p.v_r) ** 2 + np.abs(dt) ** 2
            + (1 + n * n) / r**2 * np.abs(p.v_t) ** 2 - 4 * n / r**2 * np.imag(p.v_t * np.conj(p.v_r)))


def gradient_energy(p: ModeProfile, *, exterior: bool = True) -> float:
    """||grad P_n v||^2 over the exterior of the disk."""
    e = TWO_PI * p.grid.integrate_r(gradient_density(p))
    if exterior:
        e += _tail_terms(p)["grad2"]
    return float(e)


def gradient_lower_bound(p: ModeProfile) -> float:
    """||v_r'||^2 + ||v_t'||^2 + (|n|-1)^2 ||v/r||^2 (grid part only)."""
    g = p.grid
    r = g.r
    dens = (np.abs(g.d1(p.v_r)) ** 2 + np.abs(g.d1(p.v_t)) ** 2
            + (abs(p.n) - 1) ** 2 / r**2 * (np.abs(p.v_r) ** 2 + np.abs(p.v_t) ** 2))
    return float(TWO_PI * g.integrate_r(dens))


@dataclass(frozen=True)
class NormReport:
    l2: float = 0.0
    linf: float = 0.0
    h1_seminorm: float = 0.0
    weighted_l2: float = 0.0
    y_l1: float = 0.0
    y_l2: float = 0.0
    x0_norm: float = 0.0
    x0_parts: tuple[float, ...] = (0.0, 0.0, 0.0, 0.0, 0.0)

    def as_dict(self) -> dict:
        return {"l2": self.l2, "linf": self.linf, "h1_seminorm": self.h1_seminorm,
                "weighted_l2": self.weighted_l2, "y_l1": self.y_l1, "y_l2": self.y_l2,
                "x0_norm": self.x0_norm, "x0_parts": list(self.x0_parts)}


def _scalar_report(g: np.ndarray, grid: RadialGrid) -> NormReport:
    r = grid.r
    a2 = np.abs(g) ** 2
    l2 = np.sqrt(TWO_PI * grid.integrate_r(a2))
    h1 = np.sqrt(TWO_PI * grid.integrate_r(np.abs(grid.d1(g)) ** 2))
    wl2 = np.sqrt(TWO_PI * grid.integrate_r((1 - 1 / r**2) * a2))
    return NormReport(l2=float(l2), linf=float(np.abs(g).max()), h1_seminorm=float(h1),
                      weighted_l2=float(wl2), y_l1=float(TWO_PI * grid.integrate_r(np.abs(g))))


def mode0_sup_gradient(p: ModeProfile) -> float:
    """sup |grad(v_t e_theta)| = sup sqrt(|v_t'|^2 + |v_t/r|^2)."""
    dt = p.grid.d1(p.v_t)
    return float(np.sqrt(np.abs(dt) ** 2 + np.abs(p.v_t / p.grid.r) ** 2).max())


def _profile_report(p: ModeProfile) -> NormReport:
    c = component_norms_sq(p)
    l2 = np.sqrt(c["vr2"] + c["vt2"])
    linf = p.magnitude
    h1 = np.sqrt(max(c["grad2"], 0.0))
    wl2 = np.sqrt(c["wvr2"] + c["wvt2"])
    y_l1 = TWO_PI * p.grid.integrate_r(np.abs(p.v_t)) if p.n == 0 else 0.0
    y_l2 = 0.0 if p.n == 0 else l2
    if p.n == 0:
        parts = (linf, mode0_sup_gradient(p), 0.0, 0.0, 0.0)
    else:
        parts = (0.0, 0.0, l2, h1, linf)
    return NormReport(l2=float(l2), linf=float(linf), h1_seminorm=float(h1), weighted_l2=float(wl2),
                      y_l1=float(y_l1), y_l2=float(y_l2), x0_norm=float(sum(parts)),
                      x0_parts=tuple(float(x) for x in parts))


def _solution_report(sol: FlowSolution) -> NormReport:
    p0 = sol.mode(0)
    nonzero = [p for n, p in sol.modes.items() if n != 0]
    reports = [_profile_report(p) for p in nonzero]
    q_l2 = np.sqrt(sum(rep.l2**2 for rep in reports))
    q_h1 = np.sqrt(sum(rep.h1_seminorm**2 for rep in reports))
    sum_inf = sum(rep.linf for rep in reports)
    parts = (p0.magnitude, mode0_sup_gradient(p0), float(q_l2), float(q_h1), float(sum_inf))
    r0 = _profile_report(p0)
    l2 = np.sqrt(r0.l2**2 + q_l2**2)
    wl2 = np.sqrt(r0.weighted_l2**2 + sum(rep.weighted_l2**2 for rep in reports))
    return NormReport(l2=float(l2), linf=float(p0.magnitude + sum_inf), h1_seminorm=float(np.sqrt(r0.h1_seminorm**2 + q_h1**2)),
                      weighted_l2=float(wl2), y_l1=float(r0.y_l1), y_l2=float(q_l2),
                      x0_norm=float(sum(parts)), x0_parts=parts)


def norms(obj, grid: RadialGrid | None = None) -> NormReport:
    """Norm report of a ModeProfile, a FlowSolution, or a scalar array on ``grid``."""
    if isinstance(obj, FlowSolution):
        return _solution_report(obj)
    if isinstance(obj, ModeProfile):
        return _profile_report(obj)
    if grid is None:
        raise ValueError("scalar profiles need a grid")
    return _scalar_report(np.asarray(obj), grid)


def check_conjugate_symmetry(modes: dict[int, ModeProfile], tol: float = 1e-10) -> None:
    scale = max((p.magnitude for p in modes.values()), default=0.0) or 1.0
    for n, p in modes.items():
        partner = modes.get(-n)
        if partner is None:
            raise SymmetryViolation(f"mode {n} has no partner {-n}")
        gap = max(np.abs(partner.v_r - np.conj(p.v_r)).max(), np.abs(partner.v_t - np.conj(p.v_t)).max())
        if gap > tol * scale:
            raise SymmetryViolation(f"modes {n} and {-n} differ from conjugates by {gap:.2e}")


def synthesize_physical(sol: FlowSolution, n_theta: int, *, tol: float = 1e-10):
    """Sample (v_r, v_theta) on the annulus; returns (r, theta, v_r, v_theta) real arrays."""
    check_conjugate_symmetry(sol.modes, tol)
    theta = TWO_PI * np.arange(n_theta) / n_theta
    r = sol.grid.r
    vr = np.zeros((len(r), n_theta), dtype=complex)
    vt = np.zeros_like(vr)
    for n, p in sol.modes.items():
        e = np.exp(1j * n * theta)[None, :]
        vr += p.v_r[:, None] * e
        vt += p.v_t[:, None] * e
    return r, theta, vr.real, vt.real
