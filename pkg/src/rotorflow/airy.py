"""Complex Airy function Ai and its derivative.

Three regimes, chosen by |z|:

* |z| <= SERIES_RADIUS: Maclaurin series (a smaller radius in the sector
  |arg z| <= pi/3 where Ai decays and the series cancels).
* |z| >= ASYMPTOTIC_RADIUS: Poincare asymptotic expansion for
  |arg z| <= 2 pi / 3; beyond that both exponentials matter and the
  connection formula Ai(z) = -w Ai(w z) - w^2 Ai(w^2 z), w = e^{2 pi i / 3},
  maps back into that sector.
* in between: Taylor re-expansion of the Airy ODE about the point of the
  same argument on the asymptotic circle.

The truncated asymptotic series alone cannot reach 1e-11 at |z| = 6, and
the Maclaurin series loses relative accuracy to cancellation where Ai is
exponentially small, hence the bridge.
"""

from __future__ import annotations

import math

import numpy as np

SERIES_RADIUS = 6.0
RECESSIVE_SERIES_RADIUS = 3.0
ASYMPTOTIC_RADIUS = 12.0
SERIES_TERMS = 70
ASYMPTOTIC_TERMS = 12
TAYLOR_TERMS = 40
BRIDGE_STEP = 0.5

AI0 = 1.0 / (3.0 ** (2.0 / 3.0) * math.gamma(2.0 / 3.0))
AIP0 = -1.0 / (3.0 ** (1.0 / 3.0) * math.gamma(1.0 / 3.0))


def _asymptotic_coefficients(count: int) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(count)
    u = np.array([math.gamma(3 * j + 0.5) / (54.0**j * math.factorial(j) * math.gamma(j + 0.5))
                  for j in k])
    v = -(6 * k + 1) / (6 * k - 1) * u
    return u, v


_U, _V = _asymptotic_coefficients(ASYMPTOTIC_TERMS)


def _maclaurin(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    z3 = z**3
    f = np.ones_like(z)
    g = z.copy()
    df = z**2 / 2.0
    dg = np.ones_like(z)
    tf, tg, tdf, tdg = f.copy(), g.copy(), df.copy(), dg.copy()
    for k in range(SERIES_TERMS):
        tf = tf * z3 / ((3 * k + 2) * (3 * k + 3))
        tg = tg * z3 / ((3 * k + 3) * (3 * k + 4))
        tdf = tdf * z3 / ((3 * k + 3) * (3 * k + 5))
        tdg = tdg * z3 / ((3 * k + 1) * (3 * k + 3))
        f += tf
        g += tg
        df += tdf
        dg += tdg
    return AI0 * f + AIP0 * g, AI0 * df + AIP0 * dg


def _asymptotic(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    zeta = (2.0 / 3.0) * z**1.5
    z4 = z**0.25
    su = np.zeros_like(z)
    sv = np.zeros_like(z)
    p = np.ones_like(z)
    for k in range(ASYMPTOTIC_TERMS):
        su += _U[k] * p
        sv += _V[k] * p
        p = -p / zeta
    e = np.exp(-zeta) / (2.0 * math.sqrt(math.pi))
    return e * su / z4, -e * z4 * sv


W = complex(-0.5, math.sqrt(3.0) / 2.0)


def _far_field(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ai = np.empty_like(z)
    aip = np.empty_like(z)
    direct = np.abs(np.angle(z)) <= 2.0 * np.pi / 3.0
    if direct.any():
        ai[direct], aip[direct] = _asymptotic(z[direct])
    rest = ~direct
    if rest.any():
        a1, d1 = _asymptotic(W * z[rest])
        a2, d2 = _asymptotic(W * W * z[rest])
        ai[rest] = -W * a1 - W * W * a2
        aip[rest] = -W * W * d1 - W * d2
    return ai, aip


def _ode_step(z0, a0, a1, t):
    """Advance (Ai, Ai') from z0 to z0 + t with the Taylor series of the ODE."""
    prev2 = np.zeros_like(z0)
    prev1, cur = a0, a1
    val = a0 + a1 * t
    der = a1.copy()
    tk = t.copy()
    for k in range(TAYLOR_TERMS):
        # (k+2)(k+1) a_{k+2} = z0 a_k + a_{k-1}
        nxt = (z0 * prev1 + prev2) / ((k + 2) * (k + 1))
        der = der + (k + 2) * nxt * tk
        tk = tk * t
        val = val + nxt * tk
        prev2, prev1, cur = prev1, cur, nxt
    return val, der


def _taylor_bridge(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # March along the ray in the stable direction: inward where Ai is
    # recessive at infinity, outward from the series circle elsewhere.
    unit = z / np.abs(z)
    inward = np.abs(np.angle(z)) <= np.pi / 3
    start = np.where(inward, ASYMPTOTIC_RADIUS, SERIES_RADIUS) * unit
    a0 = np.empty_like(z)
    a1 = np.empty_like(z)
    if inward.any():
        a0[inward], a1[inward] = _asymptotic(start[inward])
    if (~inward).any():
        a0[~inward], a1[~inward] = _maclaurin(start[~inward])
    span = z - start
    # per-point step counts keep each value independent of the batch
    steps = np.maximum(np.ceil(np.abs(span) / BRIDGE_STEP).astype(int), 1)
    h = span / steps
    pos = start
    for k in range(int(steps.max())):
        live = steps > k
        b0, b1 = _ode_step(pos[live], a0[live], a1[live], h[live])
        a0[live], a1[live] = b0, b1
        pos[live] = pos[live] + h[live]
    return a0, a1


def airy_pair(z) -> tuple[np.ndarray, np.ndarray]:
    """Return (Ai(z), Ai'(z)) for scalar or array complex z."""
    zz = np.asarray(z, dtype=complex)
    flat = zz.ravel()
    ai = np.empty_like(flat)
    aip = np.empty_like(flat)
    mod = np.abs(flat)
    # in the sector where Ai decays the series cancels badly, so stop earlier
    recessive = np.abs(np.angle(flat)) <= np.pi / 3
    small = mod <= np.where(recessive, RECESSIVE_SERIES_RADIUS, SERIES_RADIUS)
    large = mod >= ASYMPTOTIC_RADIUS
    mid = ~(small | large)
    for mask, fn in ((small, _maclaurin), (large, _far_field), (mid, _taylor_bridge)):
        if mask.any():
            ai[mask], aip[mask] = fn(flat[mask])
    return ai.reshape(zz.shape), aip.reshape(zz.shape)


def airy_ai(z):
    """Ai(z) for complex z; returns a scalar for scalar input."""
    ai, _ = airy_pair(z)
    return ai[()] if ai.ndim == 0 else ai


def airy_ai_prime(z):
    """Ai'(z) for complex z; returns a scalar for scalar input."""
    _, aip = airy_pair(z)
    return aip[()] if aip.ndim == 0 else aip
