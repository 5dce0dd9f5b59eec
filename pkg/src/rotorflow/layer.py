"""Airy boundary-layer profile family near the rotating disk.

With rho = |beta| (r - 1) the model operator near r = 1 is
-d^2/dr^2 + n^2 - 2 i alpha n (r - 1), whose decaying solution is
Gt(rho) = Ai(c (rho + i n |beta| / (2 alpha))) with c = beta/|beta|.
G solves -G'' + (n/|beta|)^2 G = Gt and decays; its streamfunction-level
boundary layer is phi_BL(r) = C0 G(|beta| (r - 1)).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.interpolate import BPoly

from .airy import airy_pair
from .errors import RegimeViolation, ZeroMode
from .fields import ModeProfile
from .grid import RadialGrid, cell_integration_matrix, diff_matrix

C_PLUS = complex(math.sqrt(3.0) / 2.0, 0.5)
C_MINUS = complex(math.sqrt(3.0) / 2.0, -0.5)
RHO_STEP = 0.02
RHO_MAX = 40.0
QUAD_ORDER = 8
CHECK_ORDER = 8


@dataclass(frozen=True)
class LayerParams:
    alpha: float
    n: int
    beta: complex
    abs_beta: float
    c_plus: complex = C_PLUS
    c_minus: complex = C_MINUS

    @property
    def c(self) -> complex:
        """Unit rotation beta/|beta| (c_minus when alpha n > 0)."""
        return self.beta / self.abs_beta

    @property
    def k(self) -> float:
        return abs(self.n) / self.abs_beta

    @property
    def lam(self) -> complex:
        return self.k * self.c.conjugate()

    @property
    def shift(self) -> complex:
        """Imaginary offset i n |beta| / (2 alpha) in the Airy argument."""
        return 1j * self.n * self.abs_beta / (2.0 * self.alpha)

    @property
    def width(self) -> float:
        return 1.0 / self.abs_beta


def layer_params(alpha: float, n: int) -> LayerParams:
    if n == 0 or alpha == 0:
        raise ZeroMode(f"layer parameters need alpha != 0 and n != 0 (alpha={alpha}, n={n})")
    ab = (2.0 * abs(alpha * n)) ** (1.0 / 3.0)
    beta = ab * (C_MINUS if alpha * n > 0 else C_PLUS)
    return LayerParams(alpha=float(alpha), n=int(n), beta=beta, abs_beta=ab)


def default_rho_grid(step: float = RHO_STEP, rho_max: float = RHO_MAX) -> np.ndarray:
    count = int(math.ceil(rho_max / step))
    return np.linspace(0.0, rho_max, count + 1)


def check_regime(params: LayerParams, kappa: float = 1.0) -> None:
    if abs(params.n) > kappa * math.sqrt(abs(params.alpha)) * (1 + 1e-12):
        raise RegimeViolation(
            f"|n|={abs(params.n)} exceeds {kappa:g}*|alpha|^(1/2) = {kappa * math.sqrt(abs(params.alpha)):.4g}")


def _tail_cumulative(cells, g):
    c = cells @ g
    out = np.zeros(len(g), dtype=complex)
    out[:-1] = np.cumsum(c[::-1])[::-1]
    return out


@dataclass(frozen=True, eq=False)
class LayerProfile:
    params: LayerParams
    rho: np.ndarray
    G: np.ndarray
    G1: np.ndarray
    G2: np.ndarray
    G3: np.ndarray
    Gt: np.ndarray
    Gt1: np.ndarray
    C0: complex

    @property
    def G0(self) -> complex:
        return complex(self.G[0])

    @property
    def G10(self) -> complex:
        return complex(self.G1[0])

    @cached_property
    def _splines(self):
        out = []
        for part in (np.real, np.imag):
            y = np.stack([part(self.G), part(self.G1), part(self.G2)], axis=1)
            out.append(BPoly.from_derivatives(self.rho, y))
        return out

    def at(self, rho) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(G, G', G'') at arbitrary rho >= 0 by quintic Hermite interpolation; zero past rho_max."""
        rho = np.asarray(rho, dtype=float)
        inside = rho <= self.rho[-1]
        x = np.where(inside, rho, self.rho[-1])
        sre, sim = self._splines
        vals = []
        for d in range(3):
            v = sre(x, d) + 1j * sim(x, d) if d else sre(x) + 1j * sim(x)
            vals.append(np.where(inside, v, 0.0))
        return vals[0], vals[1], vals[2]

    def _rho_derivative(self, g):
        return diff_matrix(self.rho, 1, CHECK_ORDER) @ g

    def relation_residual(self) -> float:
        """max |-G'' + k^2 G - Gt| / max |Gt|, with G'' from differencing G' (not the relation)."""
        k2 = self.params.k**2
        res = -self._rho_derivative(self.G1) + k2 * self.G - self.Gt
        return float(np.abs(res).max() / np.abs(self.Gt).max())

    def airy_residual(self) -> float:
        """max |Gt'' - c^3 (rho + shift) Gt| / max |Gt|; c^3 = -i when alpha n > 0."""
        p = self.params
        res = self._rho_derivative(self.Gt1) - p.c**3 * (self.rho + p.shift) * self.Gt
        return float(np.abs(res).max() / np.abs(self.Gt).max())

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["rho", "re_G", "im_G", "re_G1", "im_G1", "re_Gtilde", "im_Gtilde"])
        for row in zip(self.rho, self.G.real, self.G.imag, self.G1.real, self.G1.imag,
                       self.Gt.real, self.Gt.imag):
            out.writerow([repr(float(x)) for x in row])
        return buf.getvalue()


def profile_G(params: LayerParams, rho: np.ndarray | None = None, *, check: bool = True) -> LayerProfile:
    """Sample G, its first three derivatives and Gt on a uniform rho grid."""
    if check:
        check_regime(params)
    if rho is None:
        rho = default_rho_grid()
    rho = np.asarray(rho, dtype=float)
    c = params.c
    k = params.k
    z = c * (rho + params.shift)
    ai, aip = airy_pair(z)
    Gt = ai
    Gt1 = c * aip
    cells = cell_integration_matrix(rho, QUAD_ORDER)
    # J(t) = int_t^inf e^{-k s} Gt(s) ds;  I = e^{k t} J;  G = -e^{-k rho} int_rho^inf e^{2 k t} J dt
    J = _tail_cumulative(cells, np.exp(-k * rho) * Gt)
    I = np.exp(k * rho) * J
    G = -np.exp(-k * rho) * _tail_cumulative(cells, np.exp(2 * k * rho) * J)
    G1 = I - k * G
    G2 = k * k * G - Gt
    G3 = k * k * G1 - Gt1
    G0 = G[0]
    C0 = 1.0 / G0 if abs(G0) >= 1.0 else 1.0 + 0j
    return LayerProfile(params=params, rho=rho, G=G, G1=G1, G2=G2, G3=G3, Gt=Gt, Gt1=Gt1, C0=complex(C0))


def airy_integral(lam: complex, rho: np.ndarray | None = None) -> complex:
    """int_0^inf e^{-lam s} Ai(s + lam^2) ds on the real s axis; 1/3 at lam = 0."""
    s = default_rho_grid() if rho is None else np.asarray(rho, dtype=float)
    ai, _ = airy_pair(s + lam * lam)
    cells = cell_integration_matrix(s, QUAD_ORDER)
    return complex(np.sum(cells @ (np.exp(-lam * s) * ai)))


def layer_integral(params: LayerParams, rho: np.ndarray | None = None) -> complex:
    return airy_integral(params.lam, rho)


def key_quantity(params: LayerParams, profile: LayerProfile, kappa: float | None = None) -> complex:
    """phi_BL'(1) + |n| phi_BL(1) = C0 |beta| G'(0) + |n| C0 G(0)."""
    if kappa is not None:
        check_regime(params, kappa)
    return profile.C0 * (params.abs_beta * profile.G10 + abs(params.n) * profile.G0)


def key_quantity_contour(params: LayerParams, profile: LayerProfile, rho: np.ndarray | None = None) -> complex:
    """Same quantity through the rotated-contour Airy integral: C0 |beta| L(lam) / c."""
    return profile.C0 * params.abs_beta * layer_integral(params, rho) / params.c


def bl_velocity(params: LayerParams, profile: LayerProfile, b: complex, grid: RadialGrid) -> ModeProfile:
    """Velocity of the streamfunction b C0 G(|beta| (r - 1))."""
    r = grid.r
    ab = params.abs_beta
    n = params.n
    G, G1, G2 = profile.at(ab * (r - 1.0))
    amp = b * profile.C0
    psi = amp * G
    dpsi = amp * ab * G1
    omega = amp * (-ab * ab * G2 - ab * G1 / r + n * n * G / r**2)
    return ModeProfile(grid, n, 1j * n * psi / r, -dpsi, omega=omega, psi=psi, exterior=0.0, kind="bl")
