"""Steady flow past a rotating disk: linear mode solvers, Airy boundary layers and Picard iteration."""

from .airy import airy_ai, airy_ai_prime, airy_pair
from .errors import (BallExit, ConfigError, DegenerateCorrector, FitUnstable, GradingInsufficient, ModeOverflow,
                     NoContraction, NotIntegrable, RegimeViolation, RotorflowError, SingularSystem,
                     SymmetryViolation, TailNotNegligible, ZeroMode)
from .fields import BackgroundFlow, FlowSolution, ModeProfile
from .forcing import ForcingSpec, build_forcing, gaussian_ring, zero_forcing
from .grid import RadialGrid, make_grid
from .layer import layer_params, profile_G, key_quantity
from .linear import LinearSettings, decompose, solve_constructive, solve_linear, solve_mode0, solve_slip
from .nonlinear import BallSpec, axisym_gap, check_ball, nonlinear_G, picard_solve
from .radial import biot_savart, norms

__version__ = "0.1.0"

__all__ = [
    "airy_ai", "airy_ai_prime", "airy_pair",
    "BallExit", "ConfigError", "DegenerateCorrector", "FitUnstable", "GradingInsufficient", "ModeOverflow",
    "NoContraction", "NotIntegrable", "RegimeViolation", "RotorflowError", "SingularSystem",
    "SymmetryViolation", "TailNotNegligible", "ZeroMode",
    "BackgroundFlow", "FlowSolution", "ModeProfile",
    "ForcingSpec", "build_forcing", "gaussian_ring", "zero_forcing",
    "RadialGrid", "make_grid",
    "layer_params", "profile_G", "key_quantity",
    "LinearSettings", "decompose", "solve_constructive", "solve_linear", "solve_mode0", "solve_slip",
    "BallSpec", "axisym_gap", "check_ball", "nonlinear_G", "picard_solve",
    "biot_savart", "norms",
    "__version__",
]
