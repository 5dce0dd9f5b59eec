"""Named failure modes raised across the package."""


class RotorflowError(Exception):
    """Base class; `code` is the CLI exit status the error maps to."""

    code = 5


class ConfigError(RotorflowError):
    code = 2


class GradingInsufficient(RotorflowError):
    """The graded mesh cannot place enough nodes inside the boundary layer."""


class TailNotNegligible(RotorflowError):
    """A profile is neither negligible nor a clean power law at R_max."""


class NotIntegrable(RotorflowError):
    """A forcing profile has no finite L1(r dr) norm."""


class SymmetryViolation(RotorflowError):
    """Profiles at n and -n are not complex conjugates of each other."""


class ZeroMode(RotorflowError):
    """Layer parameters requested for n = 0 or alpha = 0."""


class RegimeViolation(RotorflowError):
    """The mode lies outside |n| <= |alpha|^(1/2)."""


class SingularSystem(RotorflowError):
    """A banded solve hit a numerically singular matrix."""


class DegenerateCorrector(RotorflowError):
    """The boundary-layer corrector cannot enforce the noslip condition."""


class NoContraction(RotorflowError):
    """The Picard update failed to shrink for several consecutive steps."""

    code = 3

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class BallExit(RotorflowError):
    """A Picard iterate left the admissible ball."""

    code = 3

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class FitUnstable(RotorflowError):
    """A log-log fit has R^2 below the acceptance floor."""

    code = 4

    def __init__(self, message, fit=None):
        super().__init__(message)
        self.fit = fit


class ModeOverflow(UserWarning):
    """Convolution products beyond the mode cutoff were dropped."""
