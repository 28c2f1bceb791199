"""
Residual scaling: sup over sampled t <= T0/eps^2 of ||Res(eps psi)||_{L2}
for the basic and the second-order corrected ansatz.
"""
from typing import List

import numpy as np

from app.core.nls import AnsatzOrder, assemble_psi, evolve_envelope, residual
from app.core.spectral import l2_norm
from app.experiments.base import ScalingExperiment, log, slope_criterion
from app.experiments.report import Criterion, ScalingReport, ScalingRow

BASIC_SLOPE = (1.2, 1.8)
CORRECTED_MIN_SLOPE = 2.2
CORRECTED_MIN_GAIN = 0.7


class ResidualScalingExperiment(ScalingExperiment):
    name = "residual_scaling"
    metric_name = "sup_residual_basic"
    companions = ("sup_residual_corrected2",)

    def measure(self, eps: float) -> ScalingRow:
        c, params = self.config, self.params
        grid = self.fast_grid(eps)
        env = self.initial_envelope(grid, eps)
        t_end = c.T0 / eps ** 2
        times = np.linspace(0.0, t_end, c.time_samples)
        sup_basic, sup_corrected, t_sup, fraction = 0.0, 0.0, 0.0, 0.0
        for t in times:
            env = evolve_envelope(env, eps ** 2 * t, params)
            basic = assemble_psi(env, t, eps, params, AnsatzOrder.BASIC, grid, cutoff=c.packet_cutoff)
            corrected = assemble_psi(env, t, eps, params, AnsatzOrder.CORRECTED2, grid, cutoff=c.packet_cutoff)
            res_basic = l2_norm(residual(basic))
            if res_basic > sup_basic:
                sup_basic, t_sup = res_basic, float(t)
            sup_corrected = max(sup_corrected, l2_norm(residual(corrected)))
            fraction = max(fraction, basic.truncated_fraction)
        log.info(f"🧪 [Residual] eps={eps:g}: basic {sup_basic:.3e}, corrected2 {sup_corrected:.3e}")
        spacing = float(times[1] - times[0]) if len(times) > 1 else 0.0
        return ScalingRow(
            eps=eps,
            metric=sup_basic,
            t_of_sup=t_sup,
            grid_n=grid.num_points,
            dt=spacing,
            extra={"sup_residual_corrected2": sup_corrected, "truncated_fraction": fraction},
        )

    def criteria(self, report: ScalingReport) -> List[Criterion]:
        basic = report.fit
        corrected = report.companion_fits.get("sup_residual_corrected2")
        gain = corrected.slope - basic.slope if (basic and corrected) else None
        return [
            slope_criterion("basic_slope", basic, *BASIC_SLOPE),
            slope_criterion("corrected2_slope", corrected, low=CORRECTED_MIN_SLOPE),
            Criterion("corrected2_gain", gain is not None and gain >= CORRECTED_MIN_GAIN, gain,
                      f">= {CORRECTED_MIN_GAIN}"),
        ]
