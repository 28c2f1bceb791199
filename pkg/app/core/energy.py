"""
Energy Diagnostics
Energies E_l of the equation, the normal-form operators N and T_j, the
transformed error check_R, the scaled error field R and the modified
energies built from them, plus the commutator diagnostic.

Every K0^{-1} in this module is one of the bounded combinations exported by
app.core.multipliers; a bare K0^{-1} is never formed.
"""
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from app.core import multipliers
from app.core.carrier import CarrierParams
from app.core.errors import DegenerateNormError, ParameterRangeError, SupportViolationError
from app.core.nls import AnsatzBundle
from app.core.solver import RunLog, SolverConfig, run
from app.core.spectral import (
    Field,
    Grid1D,
    dealiased_product,
    derivative,
    forward_transform,
    inner,
    integrate,
    l2_norm,
    sobolev_norm,
    triple_integral,
)
from app.lab_config import get_logger

log = get_logger("energy")

# psi_c must vanish outside the carrier bands to this relative level
SUPPORT_TOL = 1e-12


# --- REPORTS ---

@dataclass
class EnergyReport:
    """Per-level energies E_l, their quadratic parts and the cubic remainders."""

    levels: List[Tuple[int, float]]
    total: float
    sobolev_half_squares: List[Tuple[int, float]]
    cubic_remainder: List[Tuple[int, float]]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "levels": [[l, v] for l, v in self.levels],
            "total": self.total,
            "sobolev_half_squares": [[l, v] for l, v in self.sobolev_half_squares],
            "cubic_remainder": [[l, v] for l, v in self.cubic_remainder],
        }


@dataclass
class ErrorField:
    """R in u = eps psi + eps^beta theta R."""

    R: Field
    eps: float
    beta: float
    delta: float
    trace: str

    def reconstruct(self, bundle: AnsatzBundle) -> Field:
        theta = multipliers.weight_theta(self.R.grid, self.eps, self.delta)
        return bundle.eps_psi + self.eps ** self.beta * theta(self.R)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "eps": self.eps,
            "beta": self.beta,
            "trace": self.trace,
            "l2": l2_norm(self.R),
        }


@dataclass
class ModEnergyReport:
    levels: List[Tuple[int, float]]
    corrections: List[Tuple[int, float]]
    checkR_l2: float
    total: float
    hs_norm: float

    @property
    def equivalence_ratio(self) -> float:
        """sqrt(total) / ||R||_{H^s}."""
        if self.hs_norm == 0.0:
            raise DegenerateNormError("equivalence ratio of a zero error field")
        return math.sqrt(max(self.total, 0.0)) / self.hs_norm

    def to_dict(self) -> Dict[str, Any]:
        return {
            "levels": [[l, v] for l, v in self.levels],
            "corrections": [[l, v] for l, v in self.corrections],
            "checkR_l2": self.checkR_l2,
            "total": self.total,
            "hs_norm": self.hs_norm,
        }


@dataclass
class EnergyDriftSeries:
    s: int
    times: np.ndarray
    values: np.ndarray
    rate: float
    runlog: Optional[RunLog] = field(default=None, repr=False)

    @property
    def max_growth(self) -> float:
        return float(np.max(self.values / self.values[0]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "s": self.s,
            "rate": self.rate,
            "max_growth": self.max_growth,
            "times": self.times.tolist(),
            "values": self.values.tolist(),
        }


# --- ENERGIES OF THE SOLUTION ---

def k0_inv_derivatives(u: Field, top: int, hilbert: bool = False) -> Dict[int, Field]:
    """K0^{-1} d_x^m u for m = 1..top, each as k0_inv_dx applied to d_x^{m-1} u."""
    kid = multipliers.k0_inv_dx(u.grid, hilbert=hilbert)
    out: Dict[int, Field] = {}
    lower = u
    for m in range(1, top + 1):
        out[m] = kid(lower)
        lower = derivative(lower, 1)
    return out


def energy_E(u: Field, s: int, hilbert: bool = False) -> EnergyReport:
    """
    E_0 = 1/2 ||u||^2 and, for 1 <= l <= s,

        E_l = 1/2 ||d^l u||^2
              + sum_{a=1}^{l-1} C(l, a) int D_l D_a D_{l-a+1}
              + 1/2 int D_l D_l D_1,          D_m = K0^{-1} d_x^m u.
    """
    if s < 2:
        raise ParameterRangeError(f"energy level s must be >= 2, got {s}")
    D = k0_inv_derivatives(u, s, hilbert)
    levels, halves, cubics = [], [], []
    half0 = 0.5 * l2_norm(u) ** 2
    levels.append((0, half0))
    halves.append((0, half0))
    cubics.append((0, 0.0))
    du = u
    for l in range(1, s + 1):
        du = derivative(du, 1)
        half = 0.5 * l2_norm(du) ** 2
        cubic = 0.5 * triple_integral(D[l], D[l], D[1])
        for a in range(1, l):
            cubic += math.comb(l, a) * triple_integral(D[l], D[a], D[l - a + 1])
        levels.append((l, half + cubic))
        halves.append((l, half))
        cubics.append((l, cubic))
    total = float(sum(v for _, v in levels))
    if not math.isfinite(total):
        raise FloatingPointError(f"energy E_{s} is not finite")
    return EnergyReport(levels, total, halves, cubics)


def drift_rate(times: np.ndarray, values: np.ndarray, t_min: float = 0.0) -> float:
    """Smallest rho with values(t) <= values(0) exp(rho t) for all sampled t >= t_min, t > 0."""
    if values[0] <= 0.0:
        raise DegenerateNormError("energy drift needs a positive initial energy")
    keep = (times > 0.0) & (times >= t_min)
    if not np.any(keep):
        return 0.0
    return float(np.max(np.log(values[keep] / values[0]) / times[keep]))


def energy_drift_study(initial: Field, config: SolverConfig, s: int = 7,
                       t_min: Optional[float] = None) -> EnergyDriftSeries:
    """Run the solver, recording the total energy at every observation, and fit the growth rate."""
    if t_min is None:
        t_min = 0.1 * config.t_end

    def observe(state):
        return {"energy": energy_E(state.u, s, hilbert=config.hilbert).total}

    runlog = run(initial, config, [observe])
    times, values = runlog.series("energy")
    rate = drift_rate(times, values, t_min)
    log.info(f"🧮 [Energy] E_{s} drift rate {rate:.3e} over t <= {config.t_end:g}")
    return EnergyDriftSeries(s, times, values, rate, runlog)


def commutator(u: Field, hilbert: bool = False) -> Field:
    """
    [K0^{-1}, u] d_x u = K0^{-1}(u u_x) - u K0^{-1} u_x.

    u u_x = 1/2 d_x(u^2); the mean of u^2 is removed first, then the first
    term is 1/2 K0^{-1} d_x (u^2 - mean).
    """
    kid = multipliers.k0_inv_dx(u.grid, hilbert=hilbert)
    square = dealiased_product(u, u)
    square = square - integrate(square) / u.grid.length
    return 0.5 * kid(square) - dealiased_product(u, kid(u))


def commutator_ratio(u: Field, j: int, q: float, hilbert: bool = False) -> float:
    """||[K0^{-1}, u] u_x||_{H^j} / (||u||_{H^{1+q}} ||u||_{H^j})."""
    if not q > 0.5:
        raise ParameterRangeError(f"q must exceed 1/2, got {q}")
    if j < 0:
        raise ParameterRangeError(f"j must be nonnegative, got {j}")
    denominator = sobolev_norm(u, 1 + q) * sobolev_norm(u, j)
    if denominator == 0.0:
        raise DegenerateNormError("commutator ratio of the zero field")
    return sobolev_norm(commutator(u, hilbert), j) / denominator


# --- NORMAL-FORM OPERATORS ---

@dataclass(frozen=True)
class _NOperators:
    packet_inv: multipliers.Multiplier
    high_inv: multipliers.Multiplier
    inv_dx: multipliers.Multiplier
    theta: multipliers.Multiplier
    theta_inv: multipliers.Multiplier


@lru_cache(maxsize=32)
def _n_operators(grid: Grid1D, eps: float, k0_carrier: float, delta: float) -> _NOperators:
    return _NOperators(
        packet_inv=multipliers.k0_inv_packet(grid, k0_carrier, delta),
        high_inv=multipliers.k0_inv_theta_high(grid, eps, delta),
        inv_dx=multipliers.k0_inv_dx(grid),
        theta=multipliers.weight_theta(grid, eps, delta),
        theta_inv=multipliers.weight_theta_inv(grid, eps, delta),
    )


def _ops(grid: Grid1D, eps: float, params: CarrierParams) -> _NOperators:
    return _n_operators(grid, float(eps), params.k0, params.delta)


def check_packet_support(psi_c: Field, params: CarrierParams):
    """Raise SupportViolationError unless psi_c lives in ||k| - k0| <= delta."""
    coeffs = forward_transform(psi_c).coefficients
    scale = float(np.max(np.abs(coeffs)))
    if scale == 0.0:
        return
    outside = np.abs(np.abs(psi_c.grid.wavenumbers) - params.k0) > params.delta
    leak = float(np.max(np.abs(coeffs[outside]), initial=0.0))
    if leak > SUPPORT_TOL * scale:
        raise SupportViolationError(
            f"psi_c has {leak / scale:.3e} relative mass outside |k -+ {params.k0:g}| <= {params.delta:g}"
        )


def operator_N(psi_c: Field, R: Field, eps: float, params: CarrierParams) -> Field:
    """N(psi_c, R) = -theta^{-1} K0^{-1} d_x (K0^{-1} psi_c * K0^{-1} theta P_{eps,inf} R)."""
    check_packet_support(psi_c, params)
    ops = _ops(R.grid, eps, params)
    product = dealiased_product(ops.packet_inv(psi_c), ops.high_inv(R))
    return -ops.theta_inv(ops.inv_dx(product))


@dataclass(frozen=True)
class NBound:
    """||N(psi_c, f)|| <= kernel_sup * packet_l1 * ||f||_{H^1}."""

    kernel_sup: float
    packet_l1: float

    @property
    def bound(self) -> float:
        return self.kernel_sup * self.packet_l1

    def eps_scaled(self, eps: float) -> float:
        """The constant C of ||N f|| <= C eps^{-1} ||f||_{H^1}."""
        return eps * self.bound


def n_bound(psi_c: Field, eps: float, params: CarrierParams) -> NBound:
    """
    Scan the convolution kernel of N over every grid pair (k, m) with k - m
    in the support of K0^{-1} psi_c and both inside the dealiasing band:

        theta^{-1}(k) |k / tanh k| |theta(m) / tanh m| 1_{|m|>eps} / (1 + m^2)^{1/2}.

    Young's inequality then bounds ||N f||_{L2} by sup(kernel) times the
    l1 norm of the coefficients of K0^{-1} psi_c times ||f||_{H^1}.
    """
    check_packet_support(psi_c, params)
    grid = psi_c.grid
    ops = _ops(grid, eps, params)
    ca = forward_transform(ops.packet_inv(psi_c)).coefficients
    support = np.flatnonzero(ca)
    if support.size == 0:
        return NBound(0.0, 0.0)
    scale = 2.0 * np.pi / grid.length
    p = grid.mode_numbers[support][:, None]
    m = grid.mode_numbers[grid.dealias_mask][None, :]
    k_mode = p + m
    valid = np.abs(k_mode) <= grid.dealias_cutoff
    km, kk = m * scale, k_mode * scale
    high = np.where(
        np.abs(km) > eps,
        multipliers.theta_symbol(km, eps, params.delta) / np.abs(np.tanh(np.where(km == 0.0, 1.0, km))),
        0.0,
    )
    outer = multipliers.k_over_tanh(kk) / multipliers.theta_symbol(kk, eps, params.delta)
    kernel = np.where(valid, outer * high / np.sqrt(1.0 + km ** 2), 0.0)
    return NBound(float(np.max(kernel)), float(np.sum(np.abs(ca))))


def q_remainder(psi_c: Field, f: Field, eps: float, params: CarrierParams) -> Field:
    """Q(psi_c, f) = theta N(psi_c, f) - d_x(K0^{-1} psi_c f)."""
    ops = _ops(f.grid, eps, params)
    a = ops.packet_inv(psi_c)
    return ops.theta(operator_N(psi_c, f, eps, params)) - derivative(dealiased_product(a, f), 1)


def s_term(psi_c: Field, f: Field, eps: float, params: CarrierParams) -> Field:
    """S(d_x psi_c, f) = (K0^{-1} d_x psi_c) f."""
    check_packet_support(psi_c, params)
    a = _ops(f.grid, eps, params).packet_inv(psi_c)
    return dealiased_product(derivative(a, 1), f)


def z_term(psi_c: Field, f: Field, g: Field, eps: float, params: CarrierParams) -> Field:
    """Z(psi_c, f, g) = f Q(psi_c, g) + g Q(psi_c, f)."""
    return dealiased_product(f, q_remainder(psi_c, g, eps, params)) + dealiased_product(
        g, q_remainder(psi_c, f, eps, params)
    )


def antisymmetry_terms(psi_c: Field, f: Field, g: Field, eps: float, params: CarrierParams) -> List[float]:
    """
    The four integrals of
        int f theta N(g) + int g theta N(f) = int S(d_x psi_c, f) g + int Z(psi_c, f, g),
    right-hand side negated, so they sum to zero.
    """
    theta = _ops(f.grid, eps, params).theta
    return [
        inner(f, theta(operator_N(psi_c, g, eps, params))),
        inner(g, theta(operator_N(psi_c, f, eps, params))),
        -inner(s_term(psi_c, f, eps, params), g),
        -integrate(z_term(psi_c, f, g, eps, params)),
    ]


def antisymmetry_defect(psi_c: Field, f: Field, g: Field, eps: float, params: CarrierParams) -> float:
    """Sum of the antisymmetry integrals relative to ||f|| ||g||."""
    scale = l2_norm(f) * l2_norm(g)
    if scale == 0.0:
        raise DegenerateNormError("antisymmetry defect of a zero field")
    return abs(sum(antisymmetry_terms(psi_c, f, g, eps, params))) / scale


@lru_cache(maxsize=32)
def _kernel_t(grid: Grid1D, j: int, params: CarrierParams, eps: float) -> multipliers.Multiplier:
    return multipliers.kernel_t(grid, j, params, eps)


def operator_T(psi_j: Field, R: Field, j: int, eps: float, params: CarrierParams) -> Field:
    """T_j(psi_j, psi_j, R): the k-only kernel t_j applied to the dealiased triple product."""
    kernel = _kernel_t(R.grid, j, params, float(eps))
    return kernel(dealiased_product(dealiased_product(psi_j, psi_j), R))


def check_R(R: Field, bundle: AnsatzBundle, eps: Optional[float] = None,
            params: Optional[CarrierParams] = None) -> Field:
    """check R = R + eps N(psi_c, R) + eps^2 (T_1 + T_{-1})."""
    eps = bundle.eps if eps is None else eps
    params = bundle.params if params is None else params
    normal = operator_N(bundle.psi_c, R, eps, params)
    pair = operator_T(bundle.packet_field(1), R, 1, eps, params) + operator_T(
        bundle.packet_field(-1), R, -1, eps, params
    )
    residue = float(np.max(np.abs(pair.samples.imag), initial=0.0))
    if residue > 1e-10 * max(pair.max_abs(), 1e-300):
        log.debug(f"[Energy] T_1 + T_-1 imaginary residue {residue:.3e}")
    return R + eps * normal + eps ** 2 * Field(R.grid, pair.samples.real)


def error_field(u: Field, bundle: AnsatzBundle, eps: Optional[float] = None, beta: float = 2.5) -> ErrorField:
    """R = eps^{-beta} theta^{-1} (u - eps psi)."""
    eps = bundle.eps if eps is None else eps
    delta = bundle.params.delta
    theta_inv = multipliers.weight_theta_inv(u.grid, eps, delta)
    R = eps ** (-beta) * theta_inv(u - bundle.eps_psi)
    trace = f"order={bundle.order.value} cutoff={bundle.cutoff} t={bundle.t:g}"
    return ErrorField(R, eps, beta, delta, trace)


def mod_energy(R: Field, bundle: AnsatzBundle, s: int, eps: Optional[float] = None,
               params: Optional[CarrierParams] = None) -> ModEnergyReport:
    """
    E~_0 = ||check R||^2 and, for 1 <= l <= s,
    E~_l = 1/2 ||d^l R||^2 + eps int d^l R d^l N(psi_c, R).
    """
    if s < 1:
        raise ParameterRangeError(f"modified energy level s must be >= 1, got {s}")
    eps = bundle.eps if eps is None else eps
    params = bundle.params if params is None else params
    checked = l2_norm(check_R(R, bundle, eps, params))
    normal = operator_N(bundle.psi_c, R, eps, params)
    levels = [(0, checked ** 2)]
    corrections = [(0, checked ** 2 - l2_norm(R) ** 2)]
    dR, dN = R, normal
    for l in range(1, s + 1):
        dR, dN = derivative(dR, 1), derivative(dN, 1)
        correction = eps * inner(dR, dN)
        levels.append((l, 0.5 * l2_norm(dR) ** 2 + correction))
        corrections.append((l, correction))
    total = float(sum(v for _, v in levels))
    return ModEnergyReport(levels, corrections, checked, total, sobolev_norm(R, s))


# --- SMALL IDENTITIES ---

def theta_low_ratio(f: Field, eps: float, delta: float) -> Tuple[float, float]:
    """(||theta P_{0,eps} f|| / ||f||, eps + (1 - eps) eps / delta)."""
    norm = l2_norm(f)
    if norm == 0.0:
        raise DegenerateNormError("theta_low_ratio of the zero field")
    low, _ = multipliers.projections(f.grid, eps)
    theta = multipliers.weight_theta(f.grid, eps, delta)
    return l2_norm(theta(low(f))) / norm, eps + (1.0 - eps) * min(eps, delta) / delta


def perfect_derivative_defect(f: Field, g: Field) -> float:
    """|int f g f_x + 1/2 int f^2 g_x|, relative to ||f||_{H^1}^2 ||g||_{H^1}."""
    lhs = triple_integral(f, g, derivative(f, 1))
    rhs = -0.5 * triple_integral(f, f, derivative(g, 1))
    scale = sobolev_norm(f, 1) ** 2 * sobolev_norm(g, 1)
    if scale == 0.0:
        return 0.0
    return abs(lhs - rhs) / scale
