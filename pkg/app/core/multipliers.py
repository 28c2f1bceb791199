"""
Fourier multipliers of the lab as named, sampled symbols.

Every operator is stored as its symbol on the grid wavenumbers. K0^{-1} never
appears on its own: only the bounded combinations K0^{-1} d/dx,
K0^{-1} restricted to the carrier bands, and K0^{-1} theta P_{eps,inf} exist.
"""
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy.fft import fft, ifft

from app.core.errors import GridMismatchError, InvalidSamplesError, ParameterRangeError, ResonanceError
from app.core.spectral import Field, Grid1D, dealiased_product, l2_norm
from app.lab_config import get_logger

log = get_logger("multipliers")

RESONANCE_TOL = 1e-6
SCAN_POINTS_PER_DELTA = 10_000


@dataclass(frozen=True)
class Multiplier:
    """A named symbol sampled at the wavenumbers of one grid."""

    name: str
    grid: Grid1D
    symbol_values: np.ndarray
    removable_singularities: Tuple[float, ...] = ()
    real_preserving: bool = True

    def __post_init__(self):
        values = np.array(self.symbol_values, dtype=np.complex128, copy=True)
        if values.shape != (self.grid.num_points,):
            raise GridMismatchError(f"{self.name}: symbol has shape {values.shape}")
        if not np.all(np.isfinite(values)):
            bad = self.grid.wavenumbers[~np.isfinite(values)]
            raise InvalidSamplesError(f"{self.name}: non-finite symbol at k={bad[:4]}")
        if self.real_preserving:
            mirrored = np.conj(values[self.grid.reflection_index])
            defect = float(np.max(np.abs(values - mirrored)))
            if defect > 1e-12 * max(1.0, float(np.max(np.abs(values)))):
                raise InvalidSamplesError(f"{self.name}: symbol violates m(-k) = conj(m(k)) by {defect:.3e}")
        values.setflags(write=False)
        object.__setattr__(self, "symbol_values", values)
        object.__setattr__(self, "removable_singularities", tuple(self.removable_singularities))

    def apply(self, f: Field) -> Field:
        if f.grid != self.grid:
            raise GridMismatchError(f"{self.name}: field grid {f.grid} != multiplier grid {self.grid}")
        values = ifft(fft(f.samples) * self.symbol_values)
        real = f.real and self.real_preserving
        return Field(f.grid, values.real if real else values, real)

    def compose(self, other: "Multiplier") -> "Multiplier":
        """Symbol of self after other."""
        if other.grid != self.grid:
            raise GridMismatchError(f"cannot compose {self.name} and {other.name} on different grids")
        return Multiplier(
            name=f"{self.name}*{other.name}",
            grid=self.grid,
            symbol_values=self.symbol_values * other.symbol_values,
            removable_singularities=tuple(sorted(set(self.removable_singularities) | set(other.removable_singularities))),
            real_preserving=self.real_preserving and other.real_preserving,
        )

    __matmul__ = compose

    def sup(self) -> float:
        return float(np.max(np.abs(self.symbol_values)))

    def __call__(self, f: Field) -> Field:
        return self.apply(f)


def apply(mult: Multiplier, f: Field) -> Field:
    """inverse_transform(symbol * forward_transform(f))."""
    return mult.apply(f)


# --- SCALAR SYMBOLS ---

def theta_symbol(k, eps: float, delta: float):
    """Weight eps + (1 - eps)|k|/delta on |k| <= delta, 1 elsewhere."""
    k = np.abs(np.asarray(k, dtype=float))
    return np.where(k <= delta, eps + (1.0 - eps) * k / delta, 1.0)


def k_over_tanh(k):
    """k / tanh(k) continued by 1 at k = 0."""
    k = np.asarray(k, dtype=float)
    out = np.ones_like(k)
    nz = k != 0.0
    out[nz] = k[nz] / np.tanh(k[nz])
    return out


def t_symbol(k, j: int, params, eps: float):
    """
    Normal-form kernel for the psi_j psi_j R interaction, supported on |k| <= delta:

        -k (k - j k0) theta(k - 2 j k0) / (theta(k) tanh(k) tanh(j k0) tanh(k - j k0))
            / (tanh(k) - 2 tanh(j k0) - tanh(k - 2 j k0))
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    k0, delta = params.k0, params.delta
    out = np.zeros_like(k)
    inside = np.abs(k) <= delta
    ki = k[inside]
    numerator = -k_over_tanh(ki) * (ki - j * k0) * theta_symbol(ki - 2 * j * k0, eps, delta)
    detuning = np.tanh(ki) - 2.0 * np.tanh(j * k0) - np.tanh(ki - 2 * j * k0)
    denominator = theta_symbol(ki, eps, delta) * np.tanh(j * k0) * np.tanh(ki - j * k0) * detuning
    out[inside] = numerator / denominator
    return out


# --- MULTIPLIER CONSTRUCTORS ---

def identity(grid: Grid1D) -> Multiplier:
    return Multiplier("I", grid, np.ones(grid.num_points))


def k0(grid: Grid1D, hilbert: bool = False) -> Multiplier:
    """Linear part of the equation: -i tanh(k), or the Hilbert symbol -i sign(k)."""
    if hilbert:
        return Multiplier("H", grid, grid.sample_symbol(lambda k: -1j * np.sign(k)))
    return Multiplier("K0", grid, grid.sample_symbol(lambda k: -1j * np.tanh(k)))


def k0_inv_dx(grid: Grid1D, hilbert: bool = False) -> Multiplier:
    """
    (ik) / symbol(K0): -k/tanh(k) with the value -1 substituted at k = 0.
    For the Hilbert variant the symbol is -|k|, continuous at 0.
    """
    if hilbert:
        return Multiplier("H^-1 dx", grid, grid.sample_symbol(lambda k: -np.abs(k)))
    values = grid.sample_symbol(lambda k: -k / np.tanh(k))
    values[0] = -1.0
    return Multiplier("K0^-1 dx", grid, values, removable_singularities=(0.0,))


def _check_theta_params(eps: float, delta: float):
    if not 0.0 < eps < 1.0:
        raise ParameterRangeError(f"eps must lie in (0, 1), got {eps}")
    if not delta > 0.0:
        raise ParameterRangeError(f"delta must be positive, got {delta}")


def weight_theta(grid: Grid1D, eps: float, delta: float) -> Multiplier:
    _check_theta_params(eps, delta)
    return Multiplier("theta", grid, grid.sample_symbol(lambda k: theta_symbol(k, eps, delta)))


def weight_theta_inv(grid: Grid1D, eps: float, delta: float) -> Multiplier:
    _check_theta_params(eps, delta)
    return Multiplier("theta^-1", grid, grid.sample_symbol(lambda k: 1.0 / theta_symbol(k, eps, delta)))


def projections(grid: Grid1D, alpha: float) -> Tuple[Multiplier, Multiplier]:
    """(P_{0,alpha}, P_{alpha,inf}) with the sharp cut at |k| = alpha."""
    if not alpha > 0.0:
        raise ParameterRangeError(f"projection radius must be positive, got {alpha}")
    low = grid.sample_symbol(lambda k: (np.abs(k) <= alpha).astype(float))
    return (
        Multiplier(f"P[0,{alpha:g}]", grid, low),
        Multiplier(f"P[{alpha:g},inf]", grid, 1.0 - low),
    )


def k0_inv_theta_high(grid: Grid1D, eps: float, delta: float) -> Multiplier:
    """K0^{-1} theta P_{eps,inf} as one bounded symbol: i theta(k)/tanh(k) on |k| > eps."""
    _check_theta_params(eps, delta)

    def symbol(k):
        out = np.zeros(np.shape(k), dtype=np.complex128)
        high = np.abs(k) > eps
        out[high] = 1j * theta_symbol(k[high], eps, delta) / np.tanh(k[high])
        return out

    return Multiplier("K0^-1 theta P[eps,inf]", grid, grid.sample_symbol(symbol))


def k0_inv_packet(grid: Grid1D, k0_carrier: float, delta: float) -> Multiplier:
    """K0^{-1} = i/tanh(k) restricted to the carrier bands |k -+ k0| <= delta."""

    def symbol(k):
        out = np.zeros(np.shape(k), dtype=np.complex128)
        band = np.abs(np.abs(k) - k0_carrier) <= delta
        out[band] = 1j / np.tanh(k[band])
        return out

    return Multiplier("K0^-1 chi_c", grid, grid.sample_symbol(symbol))


def packet_cutoff(grid: Grid1D, center: float, half_width: float) -> Multiplier:
    """Sharp indicator of |k - center| <= half_width (one-sided unless center = 0)."""
    values = (np.abs(grid.wavenumbers - center) <= half_width).astype(float)
    if center != 0.0:
        return Multiplier(f"chi[{center:g}]", grid, values, real_preserving=False)
    return Multiplier("chi[0]", grid, grid.sample_symbol(lambda k: (np.abs(k) <= half_width).astype(float)))


def kernel_t(grid: Grid1D, j: int, params, eps: float) -> Multiplier:
    """
    Sampled normal-form kernel t_j. Real-valued but not even in k; the pair
    satisfies t_{-j}(-k) = t_j(k), so only T_1 + T_{-1} maps real to real.
    """
    if j not in (1, -1):
        raise ParameterRangeError(f"kernel_t is defined for j = +-1, got {j}")
    _check_theta_params(eps, params.delta)
    nonresonance_margin(params)
    values = t_symbol(grid.wavenumbers, j, params, eps)
    return Multiplier(f"t_{j:+d}", grid, values, removable_singularities=(0.0,), real_preserving=False)


# --- IDENTITIES AND SCANS ---

def verify_tanh_identity(k: Union[float, np.ndarray], m: Union[float, np.ndarray]):
    """(tanh k - tanh m - tanh(k-m), -tanh k tanh m tanh(k-m))."""
    k = np.asarray(k, dtype=float)
    m = np.asarray(m, dtype=float)
    lhs = np.tanh(k) - np.tanh(m) - np.tanh(k - m)
    rhs = -np.tanh(k) * np.tanh(m) * np.tanh(k - m)
    if lhs.ndim == 0:
        return float(lhs), float(rhs)
    return lhs, rhs


def operator_identity_defect(f: Field, g: Field) -> float:
    """
    ||K0(fg) - K0(f) g - f K0(g) - K0(K0(f) K0(g))|| / (||f|| ||g||) with
    every product dealiased. Zero up to roundoff for band-limited f, g.
    """
    K = k0(f.grid)
    lhs = K(dealiased_product(f, g)) - dealiased_product(K(f), g) - dealiased_product(f, K(g))
    rhs = K(dealiased_product(K(f), K(g)))
    scale = l2_norm(f) * l2_norm(g)
    if scale == 0.0:
        return 0.0
    return l2_norm(lhs - rhs) / scale


def nonresonance_margin(params, points_per_delta: int = SCAN_POINTS_PER_DELTA,
                        tolerance: float = RESONANCE_TOL) -> float:
    """
    min over j = +-1 and |k| <= delta of |tanh(k) - 2 tanh(j k0) - tanh(k - 2 j k0)|,
    scanned with step delta / points_per_delta.

    Raises:
        ResonanceError: if the margin is at or below tolerance.
    """
    k0_carrier, delta = params.k0, params.delta
    k = np.linspace(-delta, delta, 2 * points_per_delta + 1)
    margin, k_worst, j_worst = np.inf, 0.0, 1
    for j in (1, -1):
        values = np.abs(np.tanh(k) - 2.0 * np.tanh(j * k0_carrier) - np.tanh(k - 2 * j * k0_carrier))
        idx = int(np.argmin(values))
        if values[idx] < margin:
            margin, k_worst, j_worst = float(values[idx]), float(k[idx]), j
    if margin <= tolerance:
        log.warning(f"⚠️ [Multipliers] near-resonant carrier k0={k0_carrier}, delta={delta}: margin {margin:.3e}")
        raise ResonanceError(margin, k_worst, j_worst, tolerance)
    log.debug(f"[Multipliers] non-resonance margin {margin:.6f} at k={k_worst:.5f}, j={j_worst:+d}")
    return margin
