"""
NLS Approximation
Envelope evolution under d_T A = i nu1 d_X^2 A + i nu2 A|A|^2, the correctors
A_0 and A_2, Fourier-cutoff mode packets on the fast grid, the psi_c / psi_s
split, the residual of the ansatz and its exact time derivative.

Fast and slow variables are tied by X = eps (x - cg t), T = eps^2 t. The slow
grid covers [0, eps L) with the same mode numbers as the fast grid, so the
slow -> fast map is a relabelling of Fourier coefficients (exact for
band-limited envelopes).
"""
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
from scipy.fft import fft, ifft

from app.core import multipliers
from app.core.carrier import CarrierParams, harmonic_detuning, nls_coefficients  # noqa: F401
from app.core.errors import GridMismatchError, InvalidSamplesError, ParameterRangeError
from app.core.spectral import Field, Grid1D, Spectrum, dealiased_product, derivative, inverse_transform
from app.lab_config import get_logger

log = get_logger("nls")

# Truncated mass above this fraction is reported as a warning
TRUNCATION_WARN = 1e-10


class AnsatzOrder(str, Enum):
    BASIC = "basic"
    CORRECTED2 = "corrected2"


# --- GRIDS ---

def carrier_grid(eps: float, k0: float, length_factor: float = 32.0, k_resolve: float = 10.0,
                 num_points: Optional[int] = None) -> Grid1D:
    """
    Fast grid for a packet of slow width O(1): L = 2 pi m0 / k0 with
    m0 = round(k0 * length_factor / (2 pi eps)), so that k0 is a grid
    wavenumber and the slow domain eps*L has length close to length_factor.
    N is the smallest power of two whose 2/3 band reaches k_resolve.
    """
    if not 0.0 < eps < 1.0:
        raise ParameterRangeError(f"eps must lie in (0, 1), got {eps}")
    m0 = max(1, int(round(k0 * length_factor / (2.0 * math.pi * eps))))
    length = 2.0 * math.pi * m0 / k0
    if num_points is None:
        needed = 3.0 * k_resolve * length / (2.0 * math.pi)
        num_points = max(64, 2 ** int(math.ceil(math.log2(needed))))
    return Grid1D(num_points, length)


def slow_grid_for(fast_grid: Grid1D, eps: float, num_points: int = 256) -> Grid1D:
    return Grid1D(num_points, eps * fast_grid.length)


def carrier_mode(fast_grid: Grid1D, k0: float) -> int:
    mode = k0 * fast_grid.length / (2.0 * math.pi)
    m0 = int(round(mode))
    if abs(mode - m0) > 1e-9 * max(1.0, mode):
        raise GridMismatchError(f"k0={k0} is not a wavenumber of the fast grid (mode {mode:.6f})")
    return m0


# --- ENVELOPE ---

@dataclass(frozen=True)
class Envelope:
    """Complex envelope A(X) on the slow grid at slow time T."""

    slow_grid: Grid1D
    A: Field
    T: float = 0.0

    def __post_init__(self):
        if self.A.grid != self.slow_grid:
            raise GridMismatchError("envelope samples do not live on the slow grid")
        if self.A.real:
            object.__setattr__(self, "A", Field(self.slow_grid, self.A.samples, real=False))

    @classmethod
    def gaussian(cls, slow_grid: Grid1D, amplitude: float = 1.0, width: float = 1.0, T: float = 0.0) -> "Envelope":
        """amplitude * exp(-((X - Xc)/width)^2), centered in the slow domain."""
        X = slow_grid.x - 0.5 * slow_grid.length
        return cls(slow_grid, Field(slow_grid, amplitude * np.exp(-(X / width) ** 2) + 0j, real=False), T)

    @classmethod
    def from_profile(cls, slow_grid: Grid1D, X: np.ndarray, A: np.ndarray, T: float = 0.0) -> "Envelope":
        """Linear interpolation of a profile given relative to the packet center; zero outside."""
        order = np.argsort(X)
        X, A = np.asarray(X, dtype=float)[order], np.asarray(A, dtype=complex)[order]
        Xg = slow_grid.x - 0.5 * slow_grid.length
        re = np.interp(Xg, X, A.real, left=0.0, right=0.0)
        im = np.interp(Xg, X, A.imag, left=0.0, right=0.0)
        return cls(slow_grid, Field(slow_grid, re + 1j * im, real=False), T)

    @classmethod
    def zeros(cls, slow_grid: Grid1D, T: float = 0.0) -> "Envelope":
        return cls(slow_grid, Field.zeros(slow_grid, real=False), T)


def load_envelope_file(path: Union[str, Path]) -> tuple:
    """
    Read a two-column profile: X (relative to the packet center) and A as a
    Python complex literal, whitespace separated; '#' starts a comment.
    """
    xs, values = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise InvalidSamplesError(f"{path}:{lineno}: expected 'X A', got {raw.strip()!r}")
            xs.append(float(parts[0]))
            values.append(complex(parts[1]))
    if len(xs) < 2:
        raise InvalidSamplesError(f"{path}: envelope profile needs at least two samples")
    return np.array(xs), np.array(values)


def _slow_derivative(grid: Grid1D, values: np.ndarray, order: int) -> np.ndarray:
    symbol = grid.sample_symbol(lambda k: (1j * k) ** order)
    return ifft(fft(values) * symbol)


def nls_rhs(env: Envelope, params: CarrierParams) -> np.ndarray:
    """i nu1 d_X^2 A + i nu2 |A|^2 A on the slow grid."""
    A = env.A.samples
    return 1j * params.nu1 * _slow_derivative(env.slow_grid, A, 2) + 1j * params.nu2 * np.abs(A) ** 2 * A


def nls_step(env: Envelope, dT: float, params: CarrierParams) -> Envelope:
    """Strang split step: half nonlinear phase, full linear step, half nonlinear phase."""
    grid = env.slow_grid
    A = env.A.samples
    half = 0.5 * dT
    A = A * np.exp(1j * params.nu2 * np.abs(A) ** 2 * half)
    propagator = grid.sample_symbol(lambda k: np.exp(-1j * params.nu1 * k ** 2 * dT))
    A = ifft(propagator * fft(A))
    A = A * np.exp(1j * params.nu2 * np.abs(A) ** 2 * half)
    return Envelope(grid, Field(grid, A, real=False), env.T + dT)


def evolve_envelope(env: Envelope, T_target: float, params: CarrierParams, dT_max: float = 1e-3) -> Envelope:
    """Advance (or rewind) the envelope to slow time T_target in equal steps of at most dT_max."""
    span = T_target - env.T
    if span == 0.0:
        return env
    n = max(1, int(math.ceil(abs(span) / dT_max)))
    dT = span / n
    for _ in range(n):
        env = nls_step(env, dT, params)
    # pin T exactly to the target
    return Envelope(env.slow_grid, env.A, T_target)


# --- CORRECTORS ---

def corrector_a2(A1: np.ndarray, params: CarrierParams) -> np.ndarray:
    """
    Second-harmonic corrector from i(2 omega0 - tanh 2k0) A2 = i k0 A1^2,
    the balance of the e^{2i theta} terms at order eps^2.
    """
    detuning = harmonic_detuning(params.k0, 2)
    if detuning == 0.0:
        raise ParameterRangeError(f"second harmonic is resonant at k0={params.k0}")
    return params.k0 * np.asarray(A1) ** 2 / (2.0 * params.omega0 - math.tanh(2.0 * params.k0))


def corrector_a0(A1: np.ndarray, params: CarrierParams) -> np.ndarray:
    """Mean-flow corrector from (1 - cg) d_X A0 = -d_X |A1|^2, zero integration constant."""
    return -np.abs(np.asarray(A1)) ** 2 / (1.0 - params.cg)


# --- ANSATZ ---

@dataclass(frozen=True)
class AnsatzBundle:
    """
    Mode packets j in {-2, ..., 2} on the fast grid and the split
    psi = psi_c + eps psi_s with psi_c = psi_1 + psi_{-1}.
    """

    params: CarrierParams
    eps: float
    envelope: Envelope
    t: float
    order: AnsatzOrder
    cutoff: bool
    packets: Dict[int, Spectrum]
    psi_c: Field
    psi_s: Field
    truncated_fraction: float = 0.0

    @property
    def grid(self) -> Grid1D:
        return self.psi_c.grid

    @property
    def psi(self) -> Field:
        return self.psi_c + self.eps * self.psi_s

    @property
    def eps_psi(self) -> Field:
        return self.eps * self.psi_c + self.eps ** 2 * self.psi_s

    def packet_field(self, j: int) -> Field:
        return inverse_transform(self.packets[j], real=False)


def _slow_profiles(env: Envelope, params: CarrierParams, order: AnsatzOrder) -> Dict[int, np.ndarray]:
    A = env.A.samples
    profiles = {1: A}
    if order == AnsatzOrder.CORRECTED2:
        profiles[2] = corrector_a2(A, params)
        profiles[0] = corrector_a0(A, params).astype(np.complex128)
    return profiles


def _place(slow_values: np.ndarray, j: int, t: float, eps: float, params: CarrierParams,
           fast_grid: Grid1D, slow_grid: Grid1D, cutoff: bool):
    """Fast-grid coefficients of A_j(eps(x - cg t)) e^{ij(k0 x - omega0 t)}, plus the mass outside the band."""
    N, M = fast_grid.num_points, slow_grid.num_points
    m0 = carrier_mode(fast_grid, params.k0)
    if M // 2 + abs(j) * m0 >= N // 2:
        raise GridMismatchError(f"fast grid N={N} cannot hold packet j={j} (m0={m0}, slow points {M})")
    a = fft(slow_values) / M
    a[slow_grid.nyquist_index] = 0.0
    n = slow_grid.mode_numbers
    k_rel = 2.0 * math.pi * n / fast_grid.length
    a = a * np.exp(-1j * (k_rel * params.cg + j * params.omega0) * t)
    outside = np.abs(k_rel) > params.delta
    removed = float(np.sum(np.abs(a[outside]) ** 2))
    total = float(np.sum(np.abs(a) ** 2))
    if cutoff:
        a = np.where(outside, 0.0, a)
    coeffs = np.zeros(N, dtype=np.complex128)
    coeffs[(n + j * m0) % N] = a
    return coeffs, removed, total


def _check_slow_grid(env: Envelope, fast_grid: Grid1D, eps: float):
    expected = eps * fast_grid.length
    if abs(env.slow_grid.length - expected) > 1e-12 * expected:
        raise GridMismatchError(
            f"slow grid length {env.slow_grid.length} != eps * fast length {expected}"
        )


def _packets_from_profiles(profiles: Dict[int, np.ndarray], t: float, eps: float, params: CarrierParams,
                           fast_grid: Grid1D, slow_grid: Grid1D, cutoff: bool):
    packets: Dict[int, Spectrum] = {}
    removed_1, total_1 = 0.0, 0.0
    for j in (1, 2, 0):
        if j not in profiles:
            packets[j] = Spectrum.zeros(fast_grid)
            continue
        coeffs, removed, total = _place(profiles[j], j, t, eps, params, fast_grid, slow_grid, cutoff)
        if j == 1:
            removed_1, total_1 = removed, total
        packets[j] = Spectrum(fast_grid, coeffs)
    packets[0] = Spectrum(fast_grid, 0.5 * (packets[0].coefficients + packets[0].conj_reflect().coefficients))
    packets[-1] = packets[1].conj_reflect()
    packets[-2] = packets[2].conj_reflect()
    fraction = removed_1 / total_1 if total_1 > 0.0 else 0.0
    return packets, fraction


def assemble_psi(env: Envelope, t: float, eps: float, params: CarrierParams,
                 order: Union[AnsatzOrder, str], fast_grid: Grid1D, cutoff: bool = True) -> AnsatzBundle:
    """
    Evaluate the ansatz at fast time t from an envelope at slow time eps^2 t.

    basic:      psi = psi_1 + psi_{-1}
    corrected2: psi = psi_1 + psi_{-1} + eps (psi_0 + psi_2 + psi_{-2})

    With cutoff, packet j keeps only |k - j k0| <= delta; the fraction of
    envelope mass outside that band is recorded either way.
    """
    order = AnsatzOrder(order)
    if not 0.0 < eps < 1.0:
        raise ParameterRangeError(f"eps must lie in (0, 1), got {eps}")
    _check_slow_grid(env, fast_grid, eps)
    if abs(env.T - eps ** 2 * t) > 1e-9 * max(1.0, abs(env.T)):
        raise ParameterRangeError(f"envelope is at T={env.T}, expected eps^2 t = {eps ** 2 * t}")

    profiles = _slow_profiles(env, params, order)
    packets, fraction = _packets_from_profiles(profiles, t, eps, params, fast_grid, env.slow_grid, cutoff)
    if fraction > TRUNCATION_WARN:
        if cutoff:
            log.warning(f"⚠️ [NLS] envelope wider than delta/eps={params.delta / eps:.3f}: cutoff removes "
                        f"{fraction:.3e} of the packet mass")
        else:
            log.debug(f"[NLS] uncut packet carries {fraction:.3e} of its mass outside |k - k0| <= delta")

    psi_c = inverse_transform(packets[1] + packets[-1], real=True)
    psi_s = inverse_transform(packets[0] + packets[2] + packets[-2], real=True)
    return AnsatzBundle(
        params=params, eps=eps, envelope=env, t=t, order=order, cutoff=cutoff,
        packets=packets, psi_c=psi_c, psi_s=psi_s, truncated_fraction=fraction,
    )


def nls_profile(env: Envelope, t: float, eps: float, params: CarrierParams, fast_grid: Grid1D) -> Field:
    """eps psi_NLS: the uncut leading-order approximation eps A e^{i theta} + c.c."""
    return assemble_psi(env, t, eps, params, AnsatzOrder.BASIC, fast_grid, cutoff=False).eps_psi


def psi_time_derivative(bundle: AnsatzBundle, t: Optional[float] = None) -> Field:
    """
    Exact d/dt of psi: per packet, (-i j omega0) A_j - eps cg d_X A_j + eps^2 d_T A_j,
    with d_T A_1 from the NLS and d_T A_0, d_T A_2 by the chain rule through
    the corrector formulas. The cutoff is applied after differentiation.
    """
    if t is not None and abs(t - bundle.t) > 1e-12 * max(1.0, abs(t)):
        raise ParameterRangeError(f"bundle was assembled at t={bundle.t}, asked for t={t}")
    env, params, eps = bundle.envelope, bundle.params, bundle.eps
    slow = env.slow_grid
    A = env.A.samples
    dT_A = nls_rhs(env, params)

    profiles = _slow_profiles(env, params, bundle.order)
    dT_profiles = {1: dT_A}
    if bundle.order == AnsatzOrder.CORRECTED2:
        dT_profiles[2] = corrector_a2(1.0, params) * 2.0 * A * dT_A
        dT_profiles[0] = (corrector_a0(1.0, params) * 2.0 * np.real(np.conj(A) * dT_A)).astype(np.complex128)

    derived = {}
    for j, Aj in profiles.items():
        dX = _slow_derivative(slow, Aj, 1)
        derived[j] = -1j * j * params.omega0 * Aj - eps * params.cg * dX + eps ** 2 * dT_profiles[j]

    packets, _ = _packets_from_profiles(derived, bundle.t, eps, params, bundle.grid, slow, bundle.cutoff)
    d_c = packets[1] + packets[-1]
    d_s = packets[0] + packets[2] + packets[-2]
    return inverse_transform(d_c + eps * d_s, real=True)


@lru_cache(maxsize=16)
def _k0_on(grid: Grid1D) -> multipliers.Multiplier:
    return multipliers.k0(grid)


def residual(bundle: AnsatzBundle, t: Optional[float] = None) -> Field:
    """Res(eps psi) = -d_t(eps psi) + K0(eps psi) - eps psi d_x(eps psi), product dealiased."""
    eps_psi = bundle.eps_psi
    d_t = psi_time_derivative(bundle, t)
    linear = _k0_on(eps_psi.grid).apply(eps_psi)
    advection = dealiased_product(eps_psi, derivative(eps_psi, 1))
    return -bundle.eps * d_t + linear - advection
