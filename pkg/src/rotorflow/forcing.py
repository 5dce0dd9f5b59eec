"""Forcing fields per Fourier mode and the families used by sweeps."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .grid import RadialGrid, bl_width
from .radial import TWO_PI


@dataclass(frozen=True, eq=False)
class ForcingSpec:
    """Mode-wise force {n: (f_r, f_theta)} with the recipe that generated it."""

    grid: RadialGrid
    modes: dict[int, tuple[np.ndarray, np.ndarray]]
    recipe: dict = field(default_factory=lambda: {"family": "custom"})

    def __post_init__(self):
        clean = {}
        for n, (fr, ft) in self.modes.items():
            fr = np.asarray(fr, dtype=complex)
            ft = np.asarray(ft, dtype=complex)
            fr.setflags(write=False)
            ft.setflags(write=False)
            clean[int(n)] = (fr, ft)
        object.__setattr__(self, "modes", clean)

    def mode(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        z = np.zeros(len(self.grid.r), dtype=complex)
        return self.modes.get(n, (z, z))

    @property
    def mode_indices(self) -> list[int]:
        return sorted(self.modes)

    def mode_l2(self, n: int) -> float:
        fr, ft = self.mode(n)
        return float(np.sqrt(TWO_PI * self.grid.integrate_r(np.abs(fr) ** 2 + np.abs(ft) ** 2)))

    @cached_property
    def y_norm(self) -> tuple[float, float]:
        """(L1 norm of the mode-0 theta part, L2 norm of the nonradial part)."""
        _, ft0 = self.mode(0)
        l1 = float(TWO_PI * self.grid.integrate_r(np.abs(ft0)))
        l2 = float(np.sqrt(sum(self.mode_l2(n) ** 2 for n in self.modes if n != 0)))
        return l1, l2

    def is_conjugate_symmetric(self, tol: float = 1e-12) -> bool:
        # one scale for all modes: analytically empty modes carry rounding noise
        scale = max((max(np.abs(fr).max(), np.abs(ft).max()) for fr, ft in self.modes.values()), default=0.0)
        scale = max(scale, 1e-300)
        for n, (fr, ft) in self.modes.items():
            gr, gt = self.mode(-n)
            if max(np.abs(gr - np.conj(fr)).max(), np.abs(gt - np.conj(ft)).max()) > tol * scale:
                return False
        return True

    def combine(self, other: "ForcingSpec", a: float = 1.0, b: float = 1.0) -> "ForcingSpec":
        keys = sorted(set(self.modes) | set(other.modes))
        modes = {}
        for n in keys:
            fr1, ft1 = self.mode(n)
            fr2, ft2 = other.mode(n)
            modes[n] = (a * fr1 + b * fr2, a * ft1 + b * ft2)
        return ForcingSpec(self.grid, modes, {"family": "combination"})

    def scaled(self, c: float) -> "ForcingSpec":
        recipe = dict(self.recipe)
        if "amplitude" in recipe:
            recipe["amplitude"] = recipe["amplitude"] * c
        return ForcingSpec(self.grid, {n: (c * fr, c * ft) for n, (fr, ft) in self.modes.items()}, recipe)

    def on_grid(self, grid: RadialGrid) -> "ForcingSpec":
        """Rebuild from the recipe on another grid."""
        return build_forcing(self.recipe, grid)


def zero_forcing(grid: RadialGrid) -> ForcingSpec:
    return ForcingSpec(grid, {}, {"family": "zero"})


def gaussian_ring(grid: RadialGrid, modes=(1,), amplitude: float = 1.0, center: float = 2.0,
                  width_sq: float = 0.25, mode0_amplitude: float | None = None) -> ForcingSpec:
    """f_theta = A exp(-(r - center)^2 / width_sq), f_r = 0, each mode scaled to L2 norm ``amplitude``.

    Nonzero modes are completed with their conjugate partners so the force is real.
    """
    r = grid.r
    shape = np.exp(-((r - center) ** 2) / width_sq)
    unit = shape / np.sqrt(TWO_PI * grid.integrate_r(shape**2))
    zero = np.zeros_like(r)
    out = {}
    for n in modes:
        n = int(n)
        amp = amplitude
        if n == 0 and mode0_amplitude is not None:
            amp = mode0_amplitude
        for m in {n, -n}:
            out[m] = (zero, amp * unit)
    recipe = {"family": "gaussian_ring", "modes": sorted({abs(int(n)) for n in modes}),
              "amplitude": amplitude, "center": center, "width_sq": width_sq,
              "mode0_amplitude": mode0_amplitude}
    return ForcingSpec(grid, out, recipe)


def layer_ring(grid: RadialGrid, alpha: float, modes=(1,), amplitude: float = 1.0, offset: float = 2.0,
               width: float = 1.0) -> ForcingSpec:
    """Unit-L2 ring concentrated in the boundary layer of each mode.

    Mode n uses f_theta = exp(-((r - 1 - offset d) / (width d))^2) with
    d = (2 |alpha n|)^(-1/3), so the force follows the layer as alpha grows.
    Useful for probing how sharp the worst-case decay rates are.
    """
    r = grid.r
    zero = np.zeros_like(r)
    out = {}
    for n in modes:
        n = int(n)
        if n == 0:
            raise ValueError("layer_ring needs nonzero modes")
        d = bl_width(alpha, n)
        shape = np.exp(-(((r - 1.0 - offset * d) / (width * d)) ** 2))
        unit = shape / np.sqrt(TWO_PI * grid.integrate_r(shape**2))
        for m in {n, -n}:
            out[m] = (zero, amplitude * unit)
    recipe = {"family": "layer_ring", "alpha": alpha, "modes": sorted({abs(int(n)) for n in modes}),
              "amplitude": amplitude, "offset": offset, "width": width}
    return ForcingSpec(grid, out, recipe)


FAMILIES = ("zero", "gaussian_ring", "layer_ring")


def build_forcing(recipe: dict, grid: RadialGrid) -> ForcingSpec:
    family = recipe.get("family", "zero")
    if family == "zero":
        return zero_forcing(grid)
    if family == "gaussian_ring":
        kw = {k: v for k, v in recipe.items() if k != "family"}
        return gaussian_ring(grid, **kw)
    if family == "layer_ring":
        kw = {k: v for k, v in recipe.items() if k != "family"}
        return layer_ring(grid, **kw)
    raise ValueError(f"forcing family {family!r} cannot be rebuilt (known: {', '.join(FAMILIES)})")
