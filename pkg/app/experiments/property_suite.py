"""
Property suite: every operator identity and bound of the lab, evaluated on
seeded random fields, with pass/fail and the measured margin per check.
"""
import math
import time
from typing import Callable, List, Optional

import numpy as np

from app.core import energy, multipliers
from app.core.errors import LabError
from app.core.nls import AnsatzBundle, AnsatzOrder, Envelope, assemble_psi, slow_grid_for
from app.core.spectral import (
    Field,
    Grid1D,
    forward_transform,
    inner,
    l2_norm,
    random_field,
    sobolev_norm,
)
from app.experiments.base import BaseExperiment, log
from app.experiments.config import ExperimentConfig
from app.experiments.report import PropertyCheck, PropertyReport, fit_slope

OPERATOR_PAIRS = 100
TANH_SCAN_POINTS = 10_000
SYMBOL_GRID_N = 2 ** 16
PACKET_MODES = 256
PACKET_GRID_N = 2048
# random modes reaching past the carrier band of the packet grid
BAND_MODES = 320
SUITE_EPS = (0.1, 0.05)
AMPLITUDE_EPS = (0.2, 0.1, 0.05, 0.025)
EQUIVALENCE_C_MAX = 50.0
HALVING_CHANGE_MAX = 0.10
COMMUTATOR_RATIO_MAX = 10.0

TanhIdentity = Callable[[np.ndarray, np.ndarray], tuple]


def brute_force_T(psi_j: Field, R: Field, j: int, eps: float, params) -> np.ndarray:
    """
    Coefficients of T_j by the literal double sum over packet modes p1, p2 and
    R modes n with k = p1 + p2 + n, restricted to the dealiasing band like
    the fast path.
    """
    grid = R.grid
    cut = grid.dealias_cutoff
    modes = grid.mode_numbers
    c_psi = forward_transform(psi_j).coefficients
    c_R = forward_transform(R).coefficients
    support = np.flatnonzero(np.abs(c_psi) > 0.0)
    band = np.flatnonzero(np.abs(modes) <= cut)
    out = np.zeros(grid.num_points, dtype=np.complex128)
    for i1 in support:
        for i2 in support:
            pair = modes[i1] + modes[i2]
            if abs(pair) > cut:
                continue
            for n_idx in band:
                k = pair + modes[n_idx]
                if abs(k) <= cut:
                    out[k % grid.num_points] += c_psi[i1] * c_psi[i2] * c_R[n_idx]
    return multipliers.t_symbol(grid.wavenumbers, j, params, eps) * out


class PropertySuiteExperiment(BaseExperiment):
    name = "property_suite"

    def __init__(self, config: ExperimentConfig, tanh_identity: Optional[TanhIdentity] = None):
        super().__init__(config)
        self.tanh_identity = tanh_identity or multipliers.verify_tanh_identity
        self.rng = np.random.default_rng(config.seed)
        self.small = Grid1D(64, 2.0 * np.pi)

    # --- fixtures ---

    def packet_grid(self, num_points: int = PACKET_GRID_N) -> Grid1D:
        return Grid1D(num_points, 2.0 * np.pi * PACKET_MODES / self.params.k0)

    def packet_bundle(self, eps: float, num_points: int = PACKET_GRID_N) -> AnsatzBundle:
        """Cut packet whose envelope is wide enough (8 eps / delta) that the cut removes nothing visible."""
        grid = self.packet_grid(num_points)
        slow = slow_grid_for(grid, eps, self.config.slow_points)
        env = Envelope.gaussian(slow, self.config.envelope_amplitude, 8.0 * eps / self.params.delta)
        return assemble_psi(env, 0.0, eps, self.params, AnsatzOrder.BASIC, grid, cutoff=True)

    def random(self, grid: Grid1D, max_mode: int) -> Field:
        return random_field(grid, self.rng, max_mode)

    # --- multiplier identities ---

    def check_operator_identity(self) -> PropertyCheck:
        worst = max(
            multipliers.operator_identity_defect(self.random(self.small, 10), self.random(self.small, 10))
            for _ in range(OPERATOR_PAIRS)
        )
        return PropertyCheck("operator_identity", worst < 1e-10, worst, 1e-10)

    def check_tanh_identity(self) -> PropertyCheck:
        k = self.rng.uniform(-20.0, 20.0, TANH_SCAN_POINTS)
        m = self.rng.uniform(-20.0, 20.0, TANH_SCAN_POINTS)
        lhs, rhs = self.tanh_identity(k, m)
        worst = float(np.max(np.abs(np.asarray(lhs) - np.asarray(rhs))))
        return PropertyCheck("tanh_identity", worst < 1e-12, worst, 1e-12)

    def check_symbol_bound(self) -> PropertyCheck:
        grid = Grid1D(SYMBOL_GRID_N, 2.0 * np.pi * 64)
        symbol = np.abs(multipliers.k0_inv_dx(grid).symbol_values)
        ratio = float(np.max(symbol / np.sqrt(1.0 + grid.wavenumbers ** 2)))
        return PropertyCheck("k0_inv_dx_symbol_bound", ratio <= 1.0 + 1e-14, ratio, 1.0)

    def check_skew_symmetry(self) -> PropertyCheck:
        K = multipliers.k0(self.small)
        worst = 0.0
        for _ in range(self.config.samples):
            f = self.random(self.small, 20)
            worst = max(worst, abs(inner(f, K(f))) / l2_norm(f) ** 2)
        return PropertyCheck("k0_skew_symmetry", worst < 1e-12, worst, 1e-12)

    def check_theta(self) -> PropertyCheck:
        grid, delta = self.packet_grid(), self.params.delta
        worst = 0.0
        for eps in SUITE_EPS:
            theta = multipliers.weight_theta(grid, eps, delta).symbol_values.real
            inv = multipliers.weight_theta_inv(grid, eps, delta).symbol_values.real
            low = np.abs(grid.wavenumbers) <= delta
            slope = float(np.max(np.abs(grid.wavenumbers[low]) * inv[low]))
            worst = max(
                worst,
                max(0.0, eps - theta.min()),
                max(0.0, theta.max() - 1.0),
                abs(inv.max() * eps - 1.0),
                max(0.0, slope - delta) / delta,
            )
        return PropertyCheck("theta_bounds", worst < 1e-12, worst, 1e-12)

    def check_projections(self) -> PropertyCheck:
        low, high = multipliers.projections(self.packet_grid(), self.params.delta)
        overlap = (low @ high).sup()
        return PropertyCheck("projection_orthogonality", overlap == 0.0, overlap, 0.0)

    def check_nonresonance(self) -> PropertyCheck:
        margin = multipliers.nonresonance_margin(self.params)
        return PropertyCheck("nonresonance_margin", margin > multipliers.RESONANCE_TOL, margin,
                             multipliers.RESONANCE_TOL, {"k0": self.params.k0, "delta": self.params.delta})

    def check_kernel_pair(self) -> PropertyCheck:
        grid = self.packet_grid()
        eps = SUITE_EPS[0]
        plus = multipliers.kernel_t(grid, 1, self.params, eps).symbol_values
        minus = multipliers.kernel_t(grid, -1, self.params, eps).symbol_values
        defect = float(np.max(np.abs(minus[grid.reflection_index] - plus))) / float(np.max(np.abs(plus)))
        return PropertyCheck("kernel_t_pair_symmetry", defect < 1e-12, defect, 1e-12)

    # --- normal-form operators ---

    def check_n_low_projection(self) -> PropertyCheck:
        worst = 0.0
        for eps in SUITE_EPS:
            bundle = self.packet_bundle(eps)
            low, _ = multipliers.projections(bundle.grid, self.params.delta)
            f = self.random(bundle.grid, BAND_MODES)
            out = low(energy.operator_N(bundle.psi_c, low(f), eps, self.params))
            scale = l2_norm(energy.operator_N(bundle.psi_c, f, eps, self.params))
            worst = max(worst, l2_norm(out) / scale)
        return PropertyCheck("n_kills_low_band", worst < 1e-12, worst, 1e-12)

    def check_n_bound(self) -> PropertyCheck:
        worst, constants = 0.0, {}
        for eps in SUITE_EPS:
            bundle = self.packet_bundle(eps)
            bound = energy.n_bound(bundle.psi_c, eps, self.params)
            measured = 0.0
            for _ in range(10):
                f = self.random(bundle.grid, BAND_MODES)
                measured = max(measured, l2_norm(energy.operator_N(bundle.psi_c, f, eps, self.params)) / sobolev_norm(f, 1))
            worst = max(worst, measured / bound.bound)
            constants[str(eps)] = {"C": bound.eps_scaled(eps), "measured_eps_scaled": eps * measured}
        return PropertyCheck("n_l2_bound", worst <= 1.0 + 1e-12, worst, 1.0, constants)

    def check_n_antisymmetry(self) -> PropertyCheck:
        # f and g must reach the carrier band, where N lives
        worst, weakest = 0.0, math.inf
        for eps in SUITE_EPS:
            bundle = self.packet_bundle(eps)
            for _ in range(5):
                f, g = self.random(bundle.grid, BAND_MODES), self.random(bundle.grid, BAND_MODES)
                terms = energy.antisymmetry_terms(bundle.psi_c, f, g, eps, self.params)
                weakest = min(weakest, max(abs(t) for t in terms) / (l2_norm(f) * l2_norm(g)))
                worst = max(worst, energy.antisymmetry_defect(bundle.psi_c, f, g, eps, self.params))
        return PropertyCheck("n_antisymmetry", worst < 1e-8 and weakest > 1e-6, worst, 1e-8,
                             {"smallest_term_scale": weakest})

    def check_q_remainder(self) -> PropertyCheck:
        """||Q(psi_c, f)|| / ||f|| is amplitude independent and no larger for faster f."""
        eps = SUITE_EPS[0]
        # k = 8 +- k0 must stay inside the dealiasing band
        bundle = self.packet_bundle(eps, num_points=4 * PACKET_GRID_N)
        grid = bundle.grid
        ratios, scaling = {}, 0.0
        for wavenumber in (2.0, 8.0):
            mode = int(round(wavenumber * grid.length / (2.0 * np.pi)))
            f = Field(grid, np.cos(2.0 * np.pi * mode * grid.x / grid.length))
            q1 = energy.q_remainder(bundle.psi_c, f, eps, self.params)
            q10 = energy.q_remainder(bundle.psi_c, 10.0 * f, eps, self.params)
            ratios[wavenumber] = l2_norm(q1) / l2_norm(f)
            # Q is a difference of two large terms; measure against the N term
            scale = 10.0 * l2_norm(energy.operator_N(bundle.psi_c, f, eps, self.params))
            scaling = max(scaling, l2_norm(q10 - 10.0 * q1) / scale)
        decays = ratios[8.0] <= ratios[2.0]
        return PropertyCheck("q_remainder", decays and scaling < 1e-10, ratios[8.0], ratios[2.0],
                             {"ratio_k2": ratios[2.0], "ratio_k8": ratios[8.0], "amplitude_defect": scaling})

    def check_t_brute_force(self) -> PropertyCheck:
        k0 = self.params.k0
        grid = Grid1D(64, 2.0 * np.pi * 8 / k0)
        eps = SUITE_EPS[0]
        psi = Field(grid, 0.7 * np.exp(1j * k0 * grid.x), real=False)
        R = self.random(grid, grid.dealias_cutoff)
        fast = forward_transform(energy.operator_T(psi, R, 1, eps, self.params)).coefficients
        slow = brute_force_T(psi, R, 1, eps, self.params)
        error = float(np.max(np.abs(fast - slow)) / np.max(np.abs(slow)))
        outside = np.abs(grid.wavenumbers) > self.params.delta
        leak = float(np.max(np.abs(fast[outside]))) / float(np.max(np.abs(fast)))
        return PropertyCheck("t_multiplier_vs_double_sum", error < 1e-10 and leak < 1e-12, error, 1e-10,
                             {"leak_outside_delta": leak})

    # --- energies ---

    def check_perfect_derivative(self) -> PropertyCheck:
        worst = max(
            energy.perfect_derivative_defect(self.random(self.small, 8), self.random(self.small, 8))
            for _ in range(self.config.samples)
        )
        return PropertyCheck("perfect_derivative", worst < 1e-12, worst, 1e-12)

    def check_theta_low(self) -> PropertyCheck:
        grid, delta = self.packet_grid(), self.params.delta
        eps = 0.5 * delta
        worst = 0.0
        for _ in range(10):
            ratio, bound = energy.theta_low_ratio(self.random(grid, BAND_MODES), eps, delta)
            worst = max(worst, ratio / bound)
        return PropertyCheck("theta_low_band_bound", worst <= 1.0 + 1e-12, worst, 1.0)

    def check_commutator(self) -> PropertyCheck:
        ratios, invariance = [], 0.0
        for _ in range(self.config.samples):
            u = self.random(self.small, 8)
            base = energy.commutator_ratio(u, 2, 1.0)
            ratios.append(base)
            for scale in (0.5, 2.0, 10.0):
                invariance = max(invariance, abs(energy.commutator_ratio(scale * u, 2, 1.0) - base) / base)
        detail = {"max": max(ratios), "min": min(ratios), "amplitude_defect": invariance}
        ok = invariance < 1e-10 and all(math.isfinite(r) for r in ratios) and max(ratios) < COMMUTATOR_RATIO_MAX
        return PropertyCheck("commutator_ratio", ok, max(ratios), COMMUTATOR_RATIO_MAX, detail)

    def check_energy_equivalence(self) -> PropertyCheck:
        s = self.config.s
        shape = self.random(self.small, 4)
        shape = shape / sobolev_norm(shape, s)
        cubic = {l: [] for l in range(1, s + 1)}
        for eps in AMPLITUDE_EPS:
            report = energy.energy_E(eps * shape, s)
            for l, value in report.cubic_remainder[1:]:
                cubic[l].append((eps, abs(value)))
        slopes = {l: fit_slope(rows).slope for l, rows in cubic.items()}
        worst = max(abs(v - 3.0) for v in slopes.values())
        return PropertyCheck("energy_cubic_remainder_slope", worst <= 0.3, worst, 0.3,
                             {str(l): v for l, v in slopes.items()})

    def check_mod_energy(self) -> PropertyCheck:
        s = self.config.s
        constants = {}
        for eps in SUITE_EPS:
            bundle = self.packet_bundle(eps)
            ratios, forward, backward = [], 0.0, 0.0
            for _ in range(self.config.samples):
                R = self.random(bundle.grid, BAND_MODES)
                report = energy.mod_energy(R, bundle, s)
                ratios.append(report.equivalence_ratio)
                forward = max(forward, report.checkR_l2 / sobolev_norm(R, 1))
                backward = max(backward, l2_norm(R) / report.checkR_l2)
            c = max(max(ratios), 1.0 / min(ratios))
            constants[eps] = {"c": c, "check_over_h1": forward, "l2_over_check": backward}
        cs = [v["c"] for v in constants.values()]
        change = abs(cs[1] - cs[0]) / cs[0]
        forward = max(v["check_over_h1"] for v in constants.values())
        backward = max(v["l2_over_check"] for v in constants.values())
        detail = {str(k): v for k, v in constants.items()}
        detail.update({"relative_change_under_halving": change, "forward": forward, "backward": backward})
        ok = (max(cs) < EQUIVALENCE_C_MAX and forward < EQUIVALENCE_C_MAX and backward < EQUIVALENCE_C_MAX
              and change < HALVING_CHANGE_MAX)
        return PropertyCheck("modified_energy_equivalence", ok, max(cs), EQUIVALENCE_C_MAX, detail)

    # --- driver ---

    def checks(self) -> List[Callable[[], PropertyCheck]]:
        return [
            self.check_operator_identity,
            self.check_tanh_identity,
            self.check_symbol_bound,
            self.check_skew_symmetry,
            self.check_theta,
            self.check_projections,
            self.check_nonresonance,
            self.check_kernel_pair,
            self.check_n_low_projection,
            self.check_n_bound,
            self.check_n_antisymmetry,
            self.check_q_remainder,
            self.check_t_brute_force,
            self.check_perfect_derivative,
            self.check_theta_low,
            self.check_commutator,
            self.check_energy_equivalence,
            self.check_mod_energy,
        ]

    def run(self) -> PropertyReport:
        started = time.perf_counter()
        results = []
        for check in self.checks():
            name = check.__name__.replace("check_", "")
            try:
                result = check()
            except (LabError, ValueError, FloatingPointError) as e:
                log.error(f"❌ [Properties] {name} error: {e}")
                result = PropertyCheck(name, False, float("nan"), float("nan"), {"error": str(e)})
            marker = "✅" if result.passed else "❌"
            log.info(f"{marker} [Properties] {result.name}: {result.measured:.3e} (threshold {result.threshold:.3e})")
            results.append(result)
        report = PropertyReport(self.name, results, self.metadata(started))
        report.metadata["nonresonance_margin"] = self.params.margin
        return report
