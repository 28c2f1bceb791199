"""
Spectral Core
Periodic grid, discrete Fourier transforms, dealiased products, derivatives
and Sobolev norms. Every other module is built on these primitives.

Conventions:
    * the grid is x_j = j * dx on [0, L), dx = L / N, N a power of two;
    * Fourier coefficients are fft(samples) / N, so a field equals
      sum_k c_k exp(i k x) and a constant field c has coefficient c at k = 0;
    * L2 and Sobolev norms carry the continuum weight dx, i.e.
      ||f||^2 = dx * sum |f_j|^2 = L * sum |c_k|^2.
"""
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy.fft import fft, ifft, fftfreq

from app.core.errors import DegenerateNormError, GridMismatchError, InvalidSamplesError, ParameterRangeError

# Realness tolerance for samples handed to a real Field
REALNESS_TOL = 1e-12


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on [0, length) with num_points samples."""

    num_points: int
    length: float

    def __post_init__(self):
        n = int(self.num_points)
        if n < 4 or n & (n - 1):
            raise ParameterRangeError(f"num_points must be a power of two >= 4, got {self.num_points}")
        if not (np.isfinite(self.length) and self.length > 0):
            raise ParameterRangeError(f"length must be positive, got {self.length}")
        object.__setattr__(self, "num_points", n)
        object.__setattr__(self, "length", float(self.length))

    @property
    def spacing(self) -> float:
        return self.length / self.num_points

    @property
    def nyquist_index(self) -> int:
        return self.num_points // 2

    @property
    def dealias_cutoff(self) -> int:
        """Largest mode number kept by the 2/3 rule."""
        return self.num_points // 3

    @property
    def dealias_wavenumber(self) -> float:
        return self.dealias_cutoff * 2.0 * np.pi / self.length

    @cached_property
    def x(self) -> np.ndarray:
        x = np.arange(self.num_points) * self.spacing
        x.setflags(write=False)
        return x

    @cached_property
    def mode_numbers(self) -> np.ndarray:
        modes = np.rint(fftfreq(self.num_points) * self.num_points).astype(np.int64)
        modes.setflags(write=False)
        return modes

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        k = 2.0 * np.pi * self.mode_numbers / self.length
        k.setflags(write=False)
        return k

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        mask = np.abs(self.mode_numbers) <= self.dealias_cutoff
        mask.setflags(write=False)
        return mask

    @cached_property
    def reflection_index(self) -> np.ndarray:
        """Index map j -> (-j) mod N, shared by reflections in x and in k."""
        idx = (-np.arange(self.num_points)) % self.num_points
        idx.setflags(write=False)
        return idx

    def sample_symbol(self, symbol: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """
        Evaluate a Fourier symbol on the grid wavenumbers.

        The Nyquist bin is its own mirror image, so it receives the average of
        the symbol at +k_N and -k_N; odd symbols therefore vanish there and the
        result maps real fields to real fields whenever the symbol does.
        """
        k = self.wavenumbers
        with np.errstate(divide="ignore", invalid="ignore"):
            values = np.asarray(symbol(k), dtype=np.complex128).copy()
            k_nyq = abs(k[self.nyquist_index])
            pair = np.asarray(symbol(np.array([k_nyq, -k_nyq])), dtype=np.complex128)
        values[self.nyquist_index] = 0.5 * (pair[0] + pair[1])
        return values

    def index_of_wavenumber(self, k: float, tol: float = 1e-9) -> int:
        """Grid index of an on-grid wavenumber; raises if k is off-grid."""
        mode = k * self.length / (2.0 * np.pi)
        m = int(np.rint(mode))
        if abs(mode - m) > tol * max(1.0, abs(mode)):
            raise GridMismatchError(f"wavenumber {k} is not on the grid (mode {mode:.6f})")
        if abs(m) >= self.nyquist_index:
            raise GridMismatchError(f"wavenumber {k} lies beyond the Nyquist mode")
        return m % self.num_points


@dataclass(frozen=True)
class Field:
    """Samples of a real- or complex-valued function on a Grid1D."""

    grid: Grid1D
    samples: np.ndarray
    real: bool = True

    def __post_init__(self):
        values = np.array(self.samples, copy=True)
        if values.shape != (self.grid.num_points,):
            raise GridMismatchError(
                f"expected {self.grid.num_points} samples, got shape {values.shape}"
            )
        if self.real:
            if np.iscomplexobj(values):
                scale = float(np.max(np.abs(values))) if values.size else 0.0
                residue = float(np.max(np.abs(values.imag))) if values.size else 0.0
                if residue > REALNESS_TOL * max(scale, np.finfo(float).tiny):
                    raise InvalidSamplesError(f"real field has imaginary residue {residue:.3e} (scale {scale:.3e})")
                values = values.real
            values = values.astype(np.float64)
        else:
            values = values.astype(np.complex128)
        values.setflags(write=False)
        object.__setattr__(self, "samples", values)

    @classmethod
    def zeros(cls, grid: Grid1D, real: bool = True) -> "Field":
        return cls(grid, np.zeros(grid.num_points), real)

    @classmethod
    def from_function(cls, grid: Grid1D, fn: Callable[[np.ndarray], np.ndarray], real: bool = True) -> "Field":
        return cls(grid, fn(grid.x), real)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def _combine(self, other, op) -> "Field":
        if isinstance(other, Field):
            _common_grid(self, other)
            return Field(self.grid, op(self.samples, other.samples), self.real and other.real)
        if np.isscalar(other):
            real = self.real and not np.iscomplexobj(other)
            return Field(self.grid, op(self.samples, other), real)
        return NotImplemented

    def __add__(self, other):
        return self._combine(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __rsub__(self, other):
        return self._combine(other, lambda a, b: np.subtract(b, a))

    def __neg__(self):
        return Field(self.grid, -self.samples, self.real)

    def __mul__(self, scalar):
        # no Field * Field; products go through dealiased_product
        if not np.isscalar(scalar):
            return NotImplemented
        return Field(self.grid, self.samples * scalar, self.real and not np.iscomplexobj(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return self * (1.0 / scalar)


@dataclass(frozen=True)
class Spectrum:
    """Fourier coefficients of a Field, indexed like the grid wavenumbers."""

    grid: Grid1D
    coefficients: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coefficients, dtype=np.complex128, copy=True)
        if coeffs.shape != (self.grid.num_points,):
            raise GridMismatchError(
                f"expected {self.grid.num_points} coefficients, got shape {coeffs.shape}"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def zeros(cls, grid: Grid1D) -> "Spectrum":
        return cls(grid, np.zeros(grid.num_points, dtype=np.complex128))

    def conj_reflect(self) -> "Spectrum":
        """c(k) -> conj(c(-k)): the spectrum of the complex conjugate field."""
        return Spectrum(self.grid, np.conj(self.coefficients[self.grid.reflection_index]))

    def hermitian_defect(self) -> float:
        c = self.coefficients
        scale = float(np.max(np.abs(c))) if c.size else 0.0
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(c - np.conj(c[self.grid.reflection_index])))) / scale

    def is_hermitian(self, rtol: float = 1e-12) -> bool:
        return self.hermitian_defect() <= rtol

    def __add__(self, other: "Spectrum") -> "Spectrum":
        if other.grid != self.grid:
            raise GridMismatchError("spectra live on different grids")
        return Spectrum(self.grid, self.coefficients + other.coefficients)

    def __mul__(self, scalar) -> "Spectrum":
        return Spectrum(self.grid, self.coefficients * scalar)

    __rmul__ = __mul__


def _common_grid(*fields) -> Grid1D:
    grid = fields[0].grid
    for other in fields[1:]:
        if other.grid != grid:
            raise GridMismatchError(f"grid mismatch: {grid} vs {other.grid}")
    return grid


def forward_transform(f: Field) -> Spectrum:
    """Discrete analogue of (1/2pi) * integral f(x) exp(-ikx) dx, normalized per sample."""
    return Spectrum(f.grid, fft(f.samples) / f.grid.num_points)


def inverse_transform(s: Spectrum, real: Optional[bool] = None) -> Field:
    """
    Exact inverse of forward_transform.

    Args:
        s: coefficients to synthesize.
        real: force a real or complex result; by default the result is real
            exactly when the spectrum is Hermitian to 1e-12.
    """
    if real is None:
        real = s.is_hermitian()
    values = ifft(s.coefficients * s.grid.num_points)
    return Field(s.grid, values.real if real else values, real)


def dealiased_product(f: Field, g: Field) -> Field:
    """
    Product of the 2/3-band-limited parts of f and g with every mode above
    the 2/3 cutoff removed. Alias-free and symmetric in its arguments.
    """
    grid = _common_grid(f, g)
    mask = grid.dealias_mask
    f_band = ifft(fft(f.samples) * mask)
    g_band = ifft(fft(g.samples) * mask)
    values = ifft(fft(f_band * g_band) * mask)
    real = f.real and g.real
    return Field(grid, values.real if real else values, real)


def derivative(f: Field, order: int = 1) -> Field:
    """
    Spectral derivative of the given order.

    The caller is responsible for band-limiting: high orders amplify whatever
    sits near the Nyquist mode.
    """
    if order < 0:
        raise ParameterRangeError(f"derivative order must be nonnegative, got {order}")
    if order == 0:
        return f
    symbol = f.grid.sample_symbol(lambda k: (1j * k) ** order)
    values = ifft(fft(f.samples) * symbol)
    return Field(f.grid, values.real if f.real else values, f.real)


def sobolev_norm(f: Field, s: float) -> float:
    """(L * sum |c_k|^2 (1 + k^2)^s)^(1/2); equals the L2 norm at s = 0."""
    if s < 0:
        raise ParameterRangeError(f"Sobolev index must be nonnegative, got {s}")
    c = fft(f.samples) / f.grid.num_points
    weight = (1.0 + f.grid.wavenumbers ** 2) ** s
    return float(np.sqrt(f.grid.length * np.sum(np.abs(c) ** 2 * weight)))


def l2_norm(f: Field) -> float:
    """Physical-space L2 norm with the dx weight."""
    return float(np.sqrt(f.grid.spacing * np.sum(np.abs(f.samples) ** 2)))


def integrate(f: Field) -> complex:
    value = f.grid.spacing * np.sum(f.samples)
    return float(value) if f.real else complex(value)


def inner(f: Field, g: Field) -> complex:
    """Bilinear pairing dx * sum f g (no conjugation); exact for band-limited integrands."""
    grid = _common_grid(f, g)
    value = grid.spacing * np.sum(f.samples * g.samples)
    return float(value) if (f.real and g.real) else complex(value)


def triple_integral(a: Field, b: Field, c: Field) -> complex:
    """Integral of a*b*c with the pairwise product a*b dealiased."""
    return inner(dealiased_product(a, b), c)


def reflect(f: Field) -> Field:
    """x -> -x on the periodic grid."""
    return Field(f.grid, f.samples[f.grid.reflection_index], f.real)


def periodic_distance(x: np.ndarray, center: float, length: float) -> np.ndarray:
    d = np.mod(x - center, length)
    return np.minimum(d, length - d)


def seam_ratio(f: Field, center: Optional[float] = None, width_fraction: float = 0.05) -> float:
    """
    max |f| in a window around the point diametrically opposite `center`,
    relative to max |f|. For a packet centered at `center` this measures how
    much of it reaches the place where its periodic images meet.
    """
    grid = f.grid
    if center is None:
        center = 0.5 * grid.length
    peak = f.max_abs()
    if peak == 0.0:
        return 0.0
    seam = (center + 0.5 * grid.length) % grid.length
    window = periodic_distance(grid.x, seam, grid.length) <= width_fraction * grid.length
    return float(np.max(np.abs(f.samples[window])) / peak)


def packet_center(f: Field) -> float:
    """Circular center of mass of |f|^2 on [0, L)."""
    grid = f.grid
    weight = np.abs(f.samples) ** 2
    if not np.any(weight):
        raise DegenerateNormError("packet_center of a zero field")
    phase = np.exp(2j * np.pi * grid.x / grid.length)
    angle = np.angle(np.sum(weight * phase))
    return float((angle * grid.length / (2.0 * np.pi)) % grid.length)


def random_field(grid: Grid1D, rng: np.random.Generator, max_mode: int, include_mean: bool = False) -> Field:
    """Real random trigonometric polynomial with modes |j| <= max_mode."""
    if not 0 < max_mode < grid.nyquist_index:
        raise ParameterRangeError(f"max_mode must lie in (0, {grid.nyquist_index}), got {max_mode}")
    coeffs = np.zeros(grid.num_points, dtype=np.complex128)
    for m in range(1, max_mode + 1):
        value = complex(rng.standard_normal(), rng.standard_normal())
        coeffs[m] = value
        coeffs[-m] = np.conj(value)
    if include_mean:
        coeffs[0] = rng.standard_normal()
    return inverse_transform(Spectrum(grid, coeffs), real=True)
