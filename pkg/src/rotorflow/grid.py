"""Graded radial mesh on [1, R_max] with finite-difference and quadrature operators."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import GradingInsufficient

DEFAULT_R_MAX = 30.0
DEFAULT_M = 2048
DEFAULT_SIGMA = 6.0
DEFAULT_ORDER = 4
DEFAULT_QUAD_ORDER = 6
BL_MIN_POINTS = 8


def sinh_nodes(R_max: float, M: int, sigma: float) -> np.ndarray:
    """Nodes 1 + (R_max-1) sinh(sigma x)/sinh(sigma) at x = j/M; sigma=0 is uniform."""
    x = np.arange(M + 1) / M
    if sigma < 1e-8:
        s = x
    else:
        s = np.sinh(sigma * x) / math.sinh(sigma)
    r = 1.0 + (R_max - 1.0) * s
    r[0] = 1.0
    r[-1] = R_max
    return r


def fornberg_weights(x0: float, x: np.ndarray, m: int) -> np.ndarray:
    """Finite-difference weights at x0 on nodes x for derivatives 0..m.

    Returns an array of shape (m+1, len(x)).
    """
    n = len(x)
    c = np.zeros((m + 1, n))
    c1 = 1.0
    c4 = x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


def _stencil_start(j: int, width: int, last: int) -> int:
    return min(max(j - width // 2, 0), last + 1 - width)


def diff_matrix(r: np.ndarray, deriv: int, order: int) -> sp.csr_matrix:
    last = len(r) - 1
    central = order + 1
    rows, cols, vals = [], [], []
    half = central // 2
    for j in range(last + 1):
        if deriv == 2 and (j < half or j > last - half):
            width = order + 2  # one-sided second derivative needs one extra node
        else:
            width = central
        s = _stencil_start(j, width, last)
        idx = np.arange(s, s + width)
        w = fornberg_weights(r[j], r[idx], deriv)[deriv]
        rows.extend([j] * width)
        cols.extend(idx)
        vals.extend(w)
    return sp.csr_matrix((vals, (rows, cols)), shape=(last + 1, last + 1))


def cell_integration_matrix(r: np.ndarray, order: int) -> sp.csr_matrix:
    """Row c integrates the local degree-(order-1) interpolant over [r_c, r_{c+1}]."""
    last = len(r) - 1
    q = order
    starts = np.array([_stencil_start(c + 1, q, last) if q > 2 else c for c in range(last)])
    starts = np.clip(starts, 0, last + 1 - q)
    idx = starts[:, None] + np.arange(q)[None, :]
    h = np.diff(r)
    t = (r[idx] - r[:-1, None]) / h[:, None]
    V = t[:, :, None] ** np.arange(q)[None, None, :]
    moments = 1.0 / (np.arange(q) + 1.0)
    w = np.linalg.solve(np.transpose(V, (0, 2, 1)), np.broadcast_to(moments, (last, q))[..., None])[..., 0]
    w *= h[:, None]
    rows = np.repeat(np.arange(last), q)
    return sp.csr_matrix((w.ravel(), (rows, idx.ravel())), shape=(last, last + 1))


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Immutable graded mesh; operators are built lazily and cached."""

    r: np.ndarray
    sigma: float
    order: int = DEFAULT_ORDER
    quad_order: int = DEFAULT_QUAD_ORDER
    delta_bl: float | None = None
    bl_min_points: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.r.setflags(write=False)

    @property
    def R_max(self) -> float:
        return float(self.r[-1])

    @property
    def M(self) -> int:
        return len(self.r) - 1

    @cached_property
    def D1(self) -> sp.csr_matrix:
        return diff_matrix(self.r, 1, self.order)

    @cached_property
    def D2(self) -> sp.csr_matrix:
        return diff_matrix(self.r, 2, self.order)

    @cached_property
    def cells(self) -> sp.csr_matrix:
        return cell_integration_matrix(self.r, self.quad_order)

    @cached_property
    def weights(self) -> np.ndarray:
        """w_j with sum(w g) = int_1^R g r dr."""
        w = np.asarray(self.cells.sum(axis=0)).ravel() * self.r
        w.setflags(write=False)
        return w

    @cached_property
    def plain_weights(self) -> np.ndarray:
        """w_j with sum(w g) = int_1^R g dr."""
        w = np.asarray(self.cells.sum(axis=0)).ravel()
        w.setflags(write=False)
        return w

    def d1(self, g):
        return self.D1 @ g

    def d2(self, g):
        return self.D2 @ g

    def integrate(self, g) -> complex | float:
        """int_1^R g dr."""
        return self.plain_weights @ g

    def integrate_r(self, g) -> complex | float:
        """int_1^R g r dr."""
        return self.weights @ g

    def cumulative(self, g) -> np.ndarray:
        """F(r_j) = int_1^{r_j} g dr."""
        c = self.cells @ g
        out = np.zeros(len(self.r), dtype=np.result_type(c, float))
        out[1:] = np.cumsum(c)
        return out

    def cumulative_tail(self, g) -> np.ndarray:
        """T(r_j) = int_{r_j}^R g dr, summed from the far end."""
        c = self.cells @ g
        out = np.zeros(len(self.r), dtype=np.result_type(c, float))
        out[:-1] = np.cumsum(c[::-1])[::-1]
        return out

    def count_below(self, radius: float) -> int:
        return int(np.searchsorted(self.r, radius, side="right"))

    def manifest(self) -> dict:
        return {"R_max": self.R_max, "M": self.M, "sigma": self.sigma, "order": self.order,
                "quad_order": self.quad_order,
                "delta_bl": self.delta_bl, "bl_min_points": self.bl_min_points}

    def to_json(self) -> str:
        return json.dumps(self.manifest(), sort_keys=True)


def bl_width(alpha: float, n: int) -> float:
    """Layer scale (2|alpha n|)^(-1/3)."""
    return (2.0 * abs(alpha * n)) ** (-1.0 / 3.0)


def make_grid(R_max: float = DEFAULT_R_MAX, M: int = DEFAULT_M, sigma: float = DEFAULT_SIGMA,
              delta_bl: float | None = None, *, bl_min_points: int = BL_MIN_POINTS,
              order: int = DEFAULT_ORDER, quad_order: int = DEFAULT_QUAD_ORDER) -> RadialGrid:
    """Sinh-graded grid; raises GradingInsufficient if the layer is under-resolved."""
    if not R_max > 1.0:
        raise ValueError(f"R_max must exceed 1, got {R_max}")
    if M < 16:
        raise ValueError(f"M must be at least 16, got {M}")
    if order % 2 or order < 2 or quad_order % 2 or quad_order < 2:
        raise ValueError("orders must be even integers >= 2")
    r = sinh_nodes(R_max, M, sigma)
    grid = RadialGrid(r=r, sigma=sigma, order=order, quad_order=quad_order, delta_bl=delta_bl, bl_min_points=bl_min_points)
    if delta_bl is not None:
        inside = grid.count_below(1.0 + delta_bl)
        if inside < bl_min_points:
            raise GradingInsufficient(
                f"{inside} nodes in [1, 1+{delta_bl:.3g}], need {bl_min_points} (M={M}, sigma={sigma})")
    return grid
