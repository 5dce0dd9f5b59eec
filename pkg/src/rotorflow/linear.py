"""Per-mode solvers for the flow linearized about the rotating-disk solution.

For n != 0 the vorticity obeys A_n omega = rot f_n with
A_n = -d^2/dr^2 - (1/r) d/dr + n^2/r^2 - i alpha n (1 - 1/r^2),
and the streamfunction obeys H_n psi = omega.  Two independent routes
reach the noslip solution:

* constructive: slip solve (omega(1) = 0), then add a r^(-|n|) and b phi
  where phi is the fast mode carrying the Airy boundary layer;
* direct: one coupled (psi, omega) banded system with psi(1) = psi'(1) = 0.

Outside r = R_max both routes continue psi as the decaying harmonic
c r^(-|n|), which is what the Green formula produces for compactly
supported vorticity; the direct route therefore imposes
psi'(R) + (|n|/R) psi(R) = 0 there.
"""

from __future__ import annotations

import logging
import math
import threading
import weakref
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import LinAlgError, solve_banded

from .errors import DegenerateCorrector, GradingInsufficient, RotorflowError, SingularSystem, TailNotNegligible
from .fields import FlowSolution, ModeProfile
from .forcing import ForcingSpec
from .grid import RadialGrid, bl_width, make_grid
from .layer import LayerParams, LayerProfile, bl_velocity, layer_params, profile_G
from .radial import TWO_PI, NormReport, biot_savart, norms, power_tail, rot_mode

log = logging.getLogger(__name__)

DEFAULT_KAPPA = 0.2
FORCING_TAIL_TOL = 1e-12


# -- banded linear algebra -----------------------------------------------------

def banded_solve(A: sp.spmatrix, b: np.ndarray) -> np.ndarray:
    """Solve A x = b with LAPACK's banded LU; bandwidths read off the sparsity."""
    A = sp.coo_matrix(A)
    offs = A.col - A.row
    u = int(max(offs.max(), 0))
    l = int(max(-offs.min(), 0))
    ab = np.zeros((l + u + 1, A.shape[0]), dtype=np.result_type(A.dtype, b.dtype, complex))
    np.add.at(ab, (u - offs, A.col), A.data)
    try:
        x = solve_banded((l, u), ab, b, check_finite=False)
    except (LinAlgError, ValueError) as exc:
        raise SingularSystem(f"banded solve failed: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SingularSystem("banded solve produced non-finite values")
    return x


def vorticity_operator(n: int, alpha: float, grid: RadialGrid) -> sp.csr_matrix:
    """Finite-difference A_n on all nodes (boundary rows still to be replaced)."""
    r = grid.r
    diag = n * n / r**2 - 1j * alpha * n * (1.0 - 1.0 / r**2)
    return (-grid.D2 - sp.diags(1.0 / r) @ grid.D1 + sp.diags(diag)).tocsr()


def streamfunction_operator(n: int, grid: RadialGrid) -> sp.csr_matrix:
    r = grid.r
    return (-grid.D2 - sp.diags(1.0 / r) @ grid.D1 + sp.diags(n * n / r**2)).tocsr()


def _replace_rows(A: sp.spmatrix, rows: dict[int, np.ndarray | int]) -> sp.csr_matrix:
    A = sp.lil_matrix(A)
    for i, row in rows.items():
        A.rows[i] = []
        A.data[i] = []
        if isinstance(row, (int, np.integer)):
            A[i, int(row)] = 1.0
        else:
            nz = np.nonzero(row)[0]
            for j in nz:
                A[i, j] = row[j]
    return A.tocsr()


def apply_A(n: int, alpha: float, omega: np.ndarray, grid: RadialGrid) -> np.ndarray:
    return vorticity_operator(n, alpha, grid) @ omega


# -- forcing helpers -----------------------------------------------------------

def rot_forcing(n: int, f_r: np.ndarray, f_t: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """(1/r)(r f_theta)' - (i n / r) f_r."""
    r = grid.r
    return grid.d1(f_t) + f_t / r - 1j * n * f_r / r


def _check_forcing_tail(g: np.ndarray, n: int) -> None:
    scale = np.abs(g).max()
    if scale > 0 and np.abs(g[-3:]).max() > FORCING_TAIL_TOL * scale:
        raise TailNotNegligible(f"mode {n}: forcing is not negligible at R_max "
                                f"({np.abs(g[-3:]).max() / scale:.2e} of its maximum)")


# -- mode 0 ----------------------------------------------------------------------

def solve_mode0(f_t0: np.ndarray, grid: RadialGrid) -> ModeProfile:
    """Bounded solution of -v'' - v'/r + v/r^2 = f with v(1) = 0 (explicit Green formula)."""
    r = grid.r
    f = np.asarray(f_t0)
    if np.abs(f).max() == 0:
        return ModeProfile.zeros(grid, 0, kind="mode0")
    power_tail(f, r, 1.0, name="f_theta0")  # integrability of |f| r dr
    J2 = grid.cumulative_tail(f) + power_tail(f, r, 0.0, name="f_theta0")
    J1 = grid.cumulative(r**2 * f)
    F = J2[0]
    v = 0.5 * (-F / r + J1 / r + r * J2)
    dv = 0.5 * (F / r**2 - J1 / r**2 + J2)
    v[0] = 0.0
    return ModeProfile(grid, 0, np.zeros_like(v), v, omega=dv + v / r, kind="mode0")


# -- slip problem ----------------------------------------------------------------

def solve_vorticity(n: int, alpha: float, rhs: np.ndarray, grid: RadialGrid,
                    left: complex = 0.0, right: complex = 0.0) -> np.ndarray:
    """A_n omega = rhs in the interior, omega(1) = left, omega(R) = right."""
    M = grid.M
    A = _replace_rows(vorticity_operator(n, alpha, grid), {0: 0, M: M})
    b = np.array(rhs, dtype=complex)
    b[0] = left
    b[M] = right
    return banded_solve(A, b)


def solve_slip(n: int, alpha: float, f_r: np.ndarray, f_t: np.ndarray,
               grid: RadialGrid) -> tuple[ModeProfile, np.ndarray]:
    """Slip solution: omega(1) = 0, v_r(1) = 0; velocity through Biot-Savart."""
    F = rot_forcing(n, f_r, f_t, grid)
    _check_forcing_tail(F, n)
    if np.abs(F).max() == 0:
        z = ModeProfile.zeros(grid, n, kind="slip")
        return z, z.omega
    omega = solve_vorticity(n, alpha, F, grid)
    return biot_savart(n, omega, grid, kind="slip"), omega


# -- fast mode and noslip assembly -------------------------------------------------

@dataclass(frozen=True, eq=False)
class FastMode:
    """Decaying homogeneous solution: A_n chi = 0, H_n phi = chi, phi(1) = C0 G(0)."""

    n: int
    chi: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    exterior: complex
    chi_d: complex

    @property
    def phi1(self) -> complex:
        return complex(self.phi[0])

    @property
    def key(self) -> complex:
        """phi'(1) + |n| phi(1)."""
        return complex(self.dphi[0] + abs(self.n) * self.phi[0])

    def velocity(self, grid: RadialGrid) -> ModeProfile:
        return ModeProfile(grid, self.n, 1j * self.n * self.phi / grid.r, -self.dphi, omega=self.chi,
                           psi=self.phi, exterior=self.exterior, kind="fast")


def fast_mode(n: int, alpha: float, grid: RadialGrid, params: LayerParams | None = None,
              profile: LayerProfile | None = None, *, chi_at_wall: complex | None = None) -> FastMode:
    """chi with chi(1) = |beta|^2 C0 Gt(0); phi = Green(chi) + C0 G(0) r^(-|n|)."""
    params = params or layer_params(alpha, n)
    profile = profile or profile_G(params, check=False)
    m = abs(n)
    r = grid.r
    if chi_at_wall is None:
        chi_at_wall = params.abs_beta**2 * profile.C0 * profile.Gt[0]
    phi_wall = profile.C0 * profile.G0 * chi_at_wall / (params.abs_beta**2 * profile.C0 * profile.Gt[0])
    chi = solve_vorticity(n, alpha, np.zeros(len(r), dtype=complex), grid, left=chi_at_wall)
    green = biot_savart(n, chi, grid, kind="fast")
    phi = green.psi + phi_wall * r ** (-m)
    dphi = -green.v_t - m * phi_wall * r ** (-m - 1)
    ext = None if green.exterior is None else green.exterior + phi_wall
    return FastMode(n=n, chi=chi, phi=phi, dphi=dphi, exterior=ext, chi_d=phi_wall)


def assemble_noslip(n: int, alpha: float, slip: ModeProfile, fast: FastMode,
                    params: LayerParams) -> tuple[ModeProfile, complex, complex]:
    """psi = a r^(-|n|) + b phi + psi_slip with b (phi'(1) + |n| phi(1)) = v_theta_slip(1), a = -b phi(1)."""
    grid = slip.grid
    r = grid.r
    m = abs(n)
    key = fast.key
    if abs(key) < 1e-10 * params.abs_beta:
        raise DegenerateCorrector(f"mode {n}: |phi'(1) + |n| phi(1)| = {abs(key):.3e} vanishes")
    vt1 = complex(slip.v_t[0])
    b = vt1 / key
    a = -b * fast.phi1
    slow = a * r ** (-m)
    psi = slow + b * fast.phi + slip.psi
    dpsi = -m * slow / r + b * fast.dphi - slip.v_t
    omega = slip.omega + b * fast.chi
    ext = None
    if slip.exterior is not None and fast.exterior is not None:
        ext = slip.exterior + b * fast.exterior + a
    v = ModeProfile(grid, n, 1j * n * psi / r, -dpsi, omega=omega, psi=psi, exterior=ext, kind="noslip")
    return v, a, b


_FAST_CACHE: "weakref.WeakKeyDictionary[RadialGrid, dict]" = weakref.WeakKeyDictionary()
_LAYER_CACHE: dict = {}
_CACHE_LOCK = threading.Lock()


def cached_layer(alpha: float, n: int) -> tuple[LayerParams, LayerProfile]:
    """Layer parameters and profile; both depend on (alpha, n) only."""
    key = (float(alpha), int(n))
    with _CACHE_LOCK:
        hit = _LAYER_CACHE.get(key)
    if hit is None:
        params = layer_params(alpha, n)
        hit = (params, profile_G(params, check=False))
        with _CACHE_LOCK:
            if len(_LAYER_CACHE) > 512:
                _LAYER_CACHE.clear()
            _LAYER_CACHE[key] = hit
    return hit


def cached_fast_mode(n: int, alpha: float, grid: RadialGrid) -> FastMode:
    key = (float(alpha), int(n))
    with _CACHE_LOCK:
        per_grid = _FAST_CACHE.setdefault(grid, {})
        hit = per_grid.get(key)
    if hit is None:
        params, profile = cached_layer(alpha, n)
        hit = fast_mode(n, alpha, grid, params, profile)
        with _CACHE_LOCK:
            per_grid[key] = hit
    return hit


@dataclass(frozen=True, eq=False)
class ConstructiveSolution:
    n: int
    alpha: float
    noslip: ModeProfile
    slip: ModeProfile
    fast: FastMode
    params: LayerParams
    profile: LayerProfile
    a: complex
    b: complex


def solve_constructive(n: int, alpha: float, f_r: np.ndarray, f_t: np.ndarray, grid: RadialGrid,
                       params: LayerParams | None = None,
                       profile: LayerProfile | None = None) -> ConstructiveSolution:
    if params is None or profile is None:
        params, profile = cached_layer(alpha, n)
        fast = cached_fast_mode(n, alpha, grid)
    else:
        fast = fast_mode(n, alpha, grid, params, profile)
    slip, _ = solve_slip(n, alpha, f_r, f_t, grid)
    if abs(slip.v_t[0]) == 0:
        v, a, b = slip.with_kind("noslip"), 0j, 0j
    else:
        v, a, b = assemble_noslip(n, alpha, slip, fast, params)
    return ConstructiveSolution(n, alpha, v, slip, fast, params, profile, a, b)


# -- direct route --------------------------------------------------------------------

def solve_noslip_direct(n: int, alpha: float, f_r: np.ndarray, f_t: np.ndarray,
                        grid: RadialGrid) -> ModeProfile:
    """Coupled banded system for (psi, omega), unknowns interleaved node by node."""
    if n == 0:
        raise ValueError("direct route is for n != 0")
    F = rot_forcing(n, f_r, f_t, grid)
    _check_forcing_tail(F, n)
    M = grid.M
    size = M + 1
    m = abs(n)
    H = sp.coo_matrix(streamfunction_operator(n, grid))
    A = sp.coo_matrix(vorticity_operator(n, alpha, grid))
    D1 = sp.coo_matrix(grid.D1)
    rows, cols, vals = [], [], []

    def put(r_idx, c_idx, v):
        rows.extend(r_idx)
        cols.extend(c_idx)
        vals.extend(v)

    interior = lambda mat: (mat.row >= 1) & (mat.row <= M - 1)
    # psi rows 2j: H psi - omega = 0 inside
    sel = interior(H)
    put(2 * H.row[sel], 2 * H.col[sel], H.data[sel])
    j = np.arange(1, M)
    put(2 * j, 2 * j + 1, -np.ones(M - 1))
    # omega rows 2j+1: A omega = F inside
    sel = interior(A)
    put(2 * A.row[sel] + 1, 2 * A.col[sel] + 1, A.data[sel])
    # boundary rows
    put([0], [0], [1.0])                                   # psi(1) = 0
    sel = D1.row == 0
    put(np.ones(sel.sum(), dtype=int), 2 * D1.col[sel], D1.data[sel])  # psi'(1) = 0
    sel = D1.row == M
    put(np.full(sel.sum(), 2 * M), 2 * D1.col[sel], D1.data[sel])       # psi'(R) + m psi(R)/R = 0
    put([2 * M], [2 * M], [m / grid.R_max])
    put([2 * M + 1], [2 * M + 1], [1.0])                   # omega(R) = 0
    K = sp.coo_matrix((vals, (rows, cols)), shape=(2 * size, 2 * size))
    rhs = np.zeros(2 * size, dtype=complex)
    rhs[2 * j + 1] = F[1:M]
    x = banded_solve(K, rhs)
    psi = x[0::2]
    omega = x[1::2]
    dpsi = grid.d1(psi)
    ext = psi[-1] * grid.R_max**m
    return ModeProfile(grid, n, 1j * n * psi / grid.r, -dpsi, omega=omega, psi=psi, exterior=ext,
                       kind="noslip")


# -- decomposition ---------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ModeDecomposition:
    n: int
    alpha: float
    v_slip: ModeProfile
    v_slow: ModeProfile
    v_bl: ModeProfile
    v_rem: ModeProfile
    a: complex
    b: complex
    assembled: ModeProfile

    def parts(self) -> dict[str, ModeProfile]:
        return {"slip": self.v_slip, "slow": self.v_slow, "bl": self.v_bl, "rem": self.v_rem}

    def part_norms(self) -> dict[str, NormReport]:
        return {k: norms(p) for k, p in self.parts().items()}

    def row(self) -> dict:
        nr = self.part_norms()
        return {"alpha": self.alpha, "n": self.n, "norm_slip": nr["slip"].l2, "norm_slow": nr["slow"].l2,
                "norm_bl": nr["bl"].l2, "norm_rem": nr["rem"].l2, "a_abs": abs(self.a), "b_abs": abs(self.b)}


def slow_velocity(n: int, a: complex, grid: RadialGrid) -> ModeProfile:
    """Irrotational part from psi = a r^(-|n|)."""
    r = grid.r
    m = abs(n)
    psi = a * r ** (-m)
    return ModeProfile(grid, n, 1j * n * psi / r, m * psi / r, omega=np.zeros_like(psi), psi=psi,
                       exterior=a, kind="slow")


def decompose(sol: ConstructiveSolution) -> ModeDecomposition:
    grid = sol.noslip.grid
    slow = slow_velocity(sol.n, sol.a, grid)
    bl = bl_velocity(sol.params, sol.profile, sol.b, grid)
    rem = sol.fast.velocity(grid).scaled(sol.b) - bl
    return ModeDecomposition(sol.n, sol.alpha, sol.slip, slow, bl, rem.with_kind("rem"), sol.a, sol.b,
                             sol.noslip)


# -- pressure and momentum residuals ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class PressureProfile:
    n: int
    q: np.ndarray
    gauge: str = ""


def _omega_of(v: ModeProfile) -> np.ndarray:
    return v.omega if v.omega is not None else rot_mode(v)


def recover_pressure(n: int, alpha: float, v: ModeProfile, f_r: np.ndarray, f_t: np.ndarray) -> PressureProfile:
    """Pressure mode from the angular momentum balance (mode 0: from the radial one)."""
    grid = v.grid
    r = grid.r
    w = _omega_of(v)
    if n == 0:
        dq = np.real_if_close(f_r + alpha * w / r)
        q = grid.cumulative(dq)
        return PressureProfile(0, q, gauge="q_0(1) = 0; defined up to an additive constant")
    curl_term = grid.d1(w) + 1j * n * grid.d1(v.v_r / r)  # d/dr ((1/r) d/dr (r v_theta))
    bracket = (f_t + curl_term - n * n / r**2 * v.v_t + 2j * n / r**2 * v.v_r + 1j * alpha * n * v.v_t)
    return PressureProfile(n, r * bracket / (1j * n))


def momentum_residual_parts(n: int, alpha: float, v: ModeProfile, f_r: np.ndarray, f_t: np.ndarray,
                            pressure: PressureProfile | None = None, trim: int = 2) -> tuple[float, float]:
    """(L2 norm of the momentum imbalance, L2 norm of its largest term).

    For n != 0 the radial balance with the recovered pressure is used; for
    n = 0 the angular balance -(omega_0)' = f_theta0.
    """
    grid = v.grid
    r = grid.r
    w = _omega_of(v)
    sl = slice(trim, len(r) - trim)

    def l2(g):
        return math.sqrt(TWO_PI * float(np.sum(grid.weights[sl] * np.abs(g[sl]) ** 2)))

    if n == 0:
        terms = [-grid.d1(w), -f_t]
    else:
        q = (pressure or recover_pressure(n, alpha, v, f_r, f_t)).q
        div_part = grid.d1(grid.d1(r * v.v_r) / r)
        terms = [-div_part, n * n / r**2 * v.v_r, 2j * n / r**2 * v.v_t, -1j * alpha * n * v.v_r,
                 -alpha * w / r, grid.d1(q), -f_r]
    return l2(sum(terms)), max(l2(t) for t in terms)


def momentum_residual(n: int, alpha: float, v: ModeProfile, f_r: np.ndarray, f_t: np.ndarray,
                      pressure: PressureProfile | None = None, trim: int = 2) -> float:
    """Momentum imbalance relative to the largest term of the balance."""
    res, scale = momentum_residual_parts(n, alpha, v, f_r, f_t, pressure, trim)
    return res / scale if scale > 0 else 0.0


# -- full linear solve -------------------------------------------------------------------

@dataclass
class LinearSettings:
    kappa: float = DEFAULT_KAPPA
    threads: int = 1
    route: str = "auto"  # auto | constructive | direct
    bl_min_points: int = 8
    keep_details: bool = False


def constructive_regime(alpha: float, n: int, kappa: float) -> bool:
    return n != 0 and abs(n) <= kappa * math.sqrt(abs(alpha))


def check_resolution(grid: RadialGrid, alpha: float, n: int, min_points: int) -> None:
    if n == 0:
        return
    d = bl_width(alpha, n)
    inside = grid.count_below(1.0 + d)
    if inside < min_points:
        raise GradingInsufficient(f"mode {n}: {inside} nodes inside the layer width {d:.3g}, need {min_points}")


def solve_mode(n: int, alpha: float, forcing: ForcingSpec, settings: LinearSettings):
    """Noslip solution of one mode; returns (profile, details dict)."""
    grid = forcing.grid
    f_r, f_t = forcing.mode(n)
    if n == 0:
        return solve_mode0(np.real_if_close(f_t), grid), {"route": "mode0"}
    check_resolution(grid, alpha, n, settings.bl_min_points)
    route = settings.route
    if route == "auto":
        route = "constructive" if constructive_regime(alpha, n, settings.kappa) else "direct"
    if route == "constructive":
        cs = solve_constructive(n, alpha, f_r, f_t, grid)
        info = {"route": route, "a": cs.a, "b": cs.b}
        if settings.keep_details:
            info["constructive"] = cs
        return cs.noslip, info
    return solve_noslip_direct(n, alpha, f_r, f_t, grid), {"route": "direct"}


def _solve_all(alpha, forcing, N, settings):
    indices = [n for n in range(-N, N + 1)]
    symmetric = forcing.is_conjugate_symmetric()
    todo = [n for n in indices if n >= 0] if symmetric else indices

    def job(n):
        try:
            return n, solve_mode(n, alpha, forcing, settings)
        except RotorflowError as exc:
            exc.args = (f"mode {n}: {exc.args[0] if exc.args else exc}",) + exc.args[1:]
            exc.mode = n
            raise

    if settings.threads > 1:
        with ThreadPoolExecutor(max_workers=settings.threads) as pool:
            results = dict(pool.map(job, todo))
    else:
        results = dict(job(n) for n in todo)
    modes = {}
    info = {}
    for n in indices:
        if n in results:
            modes[n], info[n] = results[n]
        else:
            modes[n] = results[-n][0].conj()
            info[n] = {k: (np.conj(v) if isinstance(v, complex) else v) for k, v in results[-n][1].items()}
    return modes, info


def solve_linear(alpha: float, forcing: ForcingSpec, N: int | None = None,
                 settings: LinearSettings | None = None, *, max_doublings: int = 2) -> FlowSolution:
    """Noslip solution of the linearized problem for every mode |n| <= N."""
    settings = settings or LinearSettings()
    top = max((abs(n) for n in forcing.modes), default=0)
    if N is None:
        N = top
    if N < top:
        raise ValueError(f"mode cutoff N={N} below the forcing's top mode {top}")
    for attempt in range(max_doublings + 1):
        try:
            modes, info = _solve_all(alpha, forcing, N, settings)
            break
        except TailNotNegligible:
            if attempt == max_doublings or forcing.recipe.get("family") in (None, "custom", "combination"):
                raise
            g = forcing.grid
            bigger = make_grid(2 * g.R_max - 1, 2 * g.M, g.sigma, order=g.order, quad_order=g.quad_order)
            log.info("forcing tail at R_max=%g not negligible; retrying with R_max=%g", g.R_max, bigger.R_max)
            forcing = forcing.on_grid(bigger)
    return FlowSolution(forcing.grid, alpha, modes, info={"modes": info, "N": N, "kappa": settings.kappa})
