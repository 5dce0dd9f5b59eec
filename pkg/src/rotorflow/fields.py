"""Mode profiles, multi-mode flow fields and the rotating background flow."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from .grid import RadialGrid


@dataclass(frozen=True, eq=False)
class ModeProfile:
    """Complex radial samples of one angular Fourier mode of a velocity field.

    ``exterior`` is the coefficient c of the decaying harmonic continuation
    psi = c r^(-|n|) beyond R_max, when the profile carries one.
    """

    grid: RadialGrid
    n: int
    v_r: np.ndarray
    v_t: np.ndarray
    omega: np.ndarray | None = None
    psi: np.ndarray | None = None
    exterior: complex | None = None
    kind: str = "generic"

    def __post_init__(self):
        for name in ("v_r", "v_t", "omega", "psi"):
            a = getattr(self, name)
            if a is not None:
                a = np.asarray(a, dtype=complex)
                a.setflags(write=False)
                object.__setattr__(self, name, a)

    @classmethod
    def zeros(cls, grid: RadialGrid, n: int, kind: str = "generic") -> "ModeProfile":
        z = np.zeros(len(grid.r), dtype=complex)
        return cls(grid, n, z, z, omega=z, psi=z, exterior=0.0 if n else None, kind=kind)

    def scaled(self, c: complex) -> "ModeProfile":
        return ModeProfile(self.grid, self.n, c * self.v_r, c * self.v_t,
                           None if self.omega is None else c * self.omega,
                           None if self.psi is None else c * self.psi,
                           None if self.exterior is None else c * self.exterior, self.kind)

    def __add__(self, other: "ModeProfile") -> "ModeProfile":
        if other.n != self.n or other.grid is not self.grid:
            raise ValueError("profiles must share grid and mode")

        def _sum(a, b):
            return None if a is None or b is None else a + b

        return ModeProfile(self.grid, self.n, self.v_r + other.v_r, self.v_t + other.v_t,
                           _sum(self.omega, other.omega), _sum(self.psi, other.psi),
                           _sum(self.exterior, other.exterior), self.kind)

    def __sub__(self, other: "ModeProfile") -> "ModeProfile":
        return self + other.scaled(-1.0)

    def conj(self) -> "ModeProfile":
        def _c(a):
            return None if a is None else np.conj(a)

        return ModeProfile(self.grid, -self.n, np.conj(self.v_r), np.conj(self.v_t), _c(self.omega),
                           _c(self.psi), _c(self.exterior), self.kind)

    def with_kind(self, kind: str) -> "ModeProfile":
        return replace(self, kind=kind)

    @property
    def magnitude(self) -> float:
        return float(np.sqrt(np.abs(self.v_r) ** 2 + np.abs(self.v_t) ** 2).max())

    def to_csv(self) -> str:
        from .radial import rot_mode

        w = self.omega if self.omega is not None else rot_mode(self)
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["r", "re_vr", "im_vr", "re_vt", "im_vt", "re_w", "im_w"])
        for row in zip(self.grid.r, self.v_r.real, self.v_r.imag, self.v_t.real, self.v_t.imag,
                       w.real, w.imag):
            out.writerow([repr(float(x)) for x in row])
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class FlowSolution:
    """Finitely many modes of a velocity field; mode 0 is the axisymmetric part."""

    grid: RadialGrid
    alpha: float
    modes: dict[int, ModeProfile]
    info: dict = field(default_factory=dict)

    @classmethod
    def zeros(cls, grid: RadialGrid, alpha: float, N: int) -> "FlowSolution":
        return cls(grid, alpha, {n: ModeProfile.zeros(grid, n) for n in range(-N, N + 1)})

    @property
    def mode_indices(self) -> list[int]:
        return sorted(self.modes)

    @property
    def N(self) -> int:
        return max((abs(n) for n in self.modes), default=0)

    def mode(self, n: int) -> ModeProfile:
        p = self.modes.get(n)
        return p if p is not None else ModeProfile.zeros(self.grid, n)

    def combine(self, other: "FlowSolution", a: float = 1.0, b: float = 1.0) -> "FlowSolution":
        keys = sorted(set(self.modes) | set(other.modes))
        modes = {n: self.mode(n).scaled(a) + other.mode(n).scaled(b) for n in keys}
        return FlowSolution(self.grid, self.alpha, modes)

    def scaled(self, c: float) -> "FlowSolution":
        return FlowSolution(self.grid, self.alpha, {n: p.scaled(c) for n, p in self.modes.items()})


@dataclass(frozen=True)
class BackgroundFlow:
    """Rotating-disk solution U = x_perp/|x|^2, P = -1/(2 r^2)."""

    alpha: float

    @staticmethod
    def U_t(r):
        return 1.0 / np.asarray(r)

    @staticmethod
    def P(r):
        return -0.5 / np.asarray(r) ** 2

    def as_profile(self, grid: RadialGrid) -> ModeProfile:
        z = np.zeros(len(grid.r))
        return ModeProfile(grid, 0, z, self.U_t(grid.r), omega=z)
