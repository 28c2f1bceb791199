"""Exception hierarchy shared by the numerical core and the experiment runners."""
from typing import Optional


class LabError(Exception):
    """Base class for every error raised by the lab."""


class GridMismatchError(LabError, ValueError):
    """Operands live on different grids, or a carrier does not sit on the grid."""


class ParameterRangeError(LabError, ValueError):
    """A physical or numerical parameter is outside its admissible range."""


class ResonanceError(LabError):
    """The non-resonance margin collapsed below tolerance."""

    def __init__(self, margin: float, k: float, j: int, tolerance: float):
        self.margin = margin
        self.k = k
        self.j = j
        self.tolerance = tolerance
        super().__init__(
            f"non-resonance margin {margin:.3e} <= {tolerance:.1e} "
            f"(worst at k={k:.6f}, j={j:+d})"
        )


class SupportViolationError(LabError):
    """A packet-supported input carries spectral mass outside its allowed band."""


class SolverDivergenceError(LabError):
    """The time stepper produced NaN or Inf."""

    def __init__(self, t: float, step: int, detail: Optional[str] = None):
        self.t = t
        self.step = step
        message = f"non-finite state at t={t:.6g} (step {step})"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class DegenerateNormError(LabError):
    """A ratio diagnostic has a vanishing denominator."""


class FitError(LabError, ValueError):
    """A log-log slope fit cannot be formed from the given rows."""


class InvalidSamplesError(LabError, ValueError):
    """Field samples, symbol values or a profile file are malformed."""
