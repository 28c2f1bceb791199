"""
Carrier Parameters
Carrier wave, group velocity and NLS coefficients for a wave packet of the
equation d_t u = K0 u - u d_x u with dispersion relation omega(k) = tanh(k).
"""
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

from app.core.errors import ParameterRangeError
from app.core.multipliers import nonresonance_margin

# delta defaults to this fraction of the admissible bound k0/20
DELTA_FRACTION = 0.9


def nls_coefficients(k0: float) -> Tuple[float, float]:
    """
    Coefficients of d_T A = i nu1 d_X^2 A + i nu2 A|A|^2.

    nu1 = tanh''(k0)/2 = -tanh(k0) sech^2(k0)
    nu2 = k0 (k0 / (tanh(2 k0) - 2 tanh(k0)) + 1 / tanh^2(k0))
    """
    if not k0 > 0.0:
        raise ParameterRangeError(f"carrier wavenumber must be positive, got {k0}")
    t = math.tanh(k0)
    sech2 = 1.0 / math.cosh(k0) ** 2 if k0 < 350.0 else 0.0
    nu1 = -t * sech2
    nu2 = k0 * (k0 / (math.tanh(2.0 * k0) - 2.0 * t) + 1.0 / t ** 2)
    return nu1, nu2


def harmonic_detuning(k0: float, j: int) -> float:
    """tanh(j k0) - j tanh(k0); the (j, j) corrector equation is solvable iff this is nonzero."""
    return math.tanh(j * k0) - j * math.tanh(k0)


@dataclass(frozen=True)
class CarrierParams:
    """k0, omega0, cg, nu1, nu2 and the packet half-width delta < k0/20."""

    k0: float
    delta: float
    omega0: float = field(init=False)
    cg: float = field(init=False)
    nu1: float = field(init=False)
    nu2: float = field(init=False)
    margin: float = field(init=False, repr=False)

    def __post_init__(self):
        if not self.k0 > 0.0:
            raise ParameterRangeError(f"k0 must be positive, got {self.k0}")
        if not 0.0 < self.delta < self.k0 / 20.0:
            raise ParameterRangeError(f"delta must lie in (0, k0/20) = (0, {self.k0 / 20.0:g}), got {self.delta}")
        nu1, nu2 = nls_coefficients(self.k0)
        object.__setattr__(self, "omega0", math.tanh(self.k0))
        object.__setattr__(self, "cg", 1.0 - math.tanh(self.k0) ** 2)
        object.__setattr__(self, "nu1", nu1)
        object.__setattr__(self, "nu2", nu2)
        object.__setattr__(self, "margin", nonresonance_margin(self))

    @classmethod
    def from_k0(cls, k0: float, delta: Optional[float] = None) -> "CarrierParams":
        if delta is None:
            delta = DELTA_FRACTION * k0 / 20.0
        return cls(k0=k0, delta=delta)

    def as_dict(self) -> dict:
        return {
            "k0": self.k0,
            "delta": self.delta,
            "omega0": self.omega0,
            "cg": self.cg,
            "nu1": self.nu1,
            "nu2": self.nu2,
            "nonresonance_margin": self.margin,
        }
