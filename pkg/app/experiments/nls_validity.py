"""
NLS validity: distance between the PDE solution started at eps psi(0) and
the NLS approximation over t <= T0 / eps^2, as a function of eps.
"""
from typing import List

from app.core.energy import error_field
from app.core.nls import AnsatzOrder, assemble_psi, evolve_envelope, nls_profile
from app.core.solver import run
from app.core.spectral import l2_norm, packet_center, seam_ratio, sobolev_norm
from app.experiments.base import ScalingExperiment, log, slope_criterion
from app.experiments.report import Criterion, ScalingReport, ScalingRow

# headline exponent is 3/2; preasymptotic eps gets this much slack
MIN_SLOPE = 1.4


class _ValidityTracker:
    """Observer advancing the envelope alongside the PDE and recording the error norms."""

    def __init__(self, env, eps, params, grid, s, cutoff):
        self.env = env
        self.eps, self.params, self.grid, self.s, self.cutoff = eps, params, grid, s, cutoff
        self.sup = {"hs": 0.0, "l2": 0.0, "linf": 0.0, "corrected": 0.0, "corrected_l2": 0.0, "R_hs": 0.0}
        self.t_of_sup = 0.0

    def __call__(self, state):
        eps, params = self.eps, self.params
        self.env = evolve_envelope(self.env, eps ** 2 * state.t, params)
        diff = state.u - nls_profile(self.env, state.t, eps, params, self.grid)
        bundle = assemble_psi(self.env, state.t, eps, params, AnsatzOrder.CORRECTED2, self.grid, self.cutoff)
        corrected = state.u - bundle.eps_psi
        values = {
            "hs": sobolev_norm(diff, self.s),
            "l2": l2_norm(diff),
            "linf": diff.max_abs(),
            "corrected": sobolev_norm(corrected, self.s),
            "corrected_l2": l2_norm(corrected),
            "R_hs": sobolev_norm(error_field(state.u, bundle).R, self.s),
        }
        if values["hs"] > self.sup["hs"]:
            self.t_of_sup = state.t
        for key, value in values.items():
            self.sup[key] = max(self.sup[key], value)
        return {f"{key}_error": value for key, value in values.items()}


class NlsValidityExperiment(ScalingExperiment):
    name = "nls_validity"
    metric_name = "sup_hs_error"
    # L2 companions are not dominated by the weighted harmonic bands of H^s
    companions = ("sup_l2_error", "sup_linf_error", "sup_corrected_error", "sup_corrected_l2_error", "sup_R_hs")

    def measure(self, eps: float) -> ScalingRow:
        c, params = self.config, self.params
        grid = self.fast_grid(eps)
        env0 = self.initial_envelope(grid, eps)
        start = assemble_psi(env0, 0.0, eps, params, c.order, grid, cutoff=c.packet_cutoff)
        u0 = start.eps_psi
        t_end = c.T0 / eps ** 2
        seam = seam_ratio(u0, packet_center(u0))
        log.info(f"🧪 [NLS-Validity] eps={eps:g}: N={grid.num_points}, L={grid.length:.1f}, "
                 f"t_end={t_end:g}, seam ratio {seam:.2e}")

        def measure_dt(dt):
            tracker = _ValidityTracker(env0, eps, params, grid, c.s, c.packet_cutoff)
            runlog = run(u0, self.solver_config(dt, t_end), [tracker])
            return tracker.sup["hs"], (tracker, runlog)

        selection = self.select_dt(measure_dt)
        tracker, runlog = selection.payload
        return ScalingRow(
            eps=eps,
            metric=tracker.sup["hs"],
            t_of_sup=tracker.t_of_sup,
            grid_n=grid.num_points,
            dt=runlog.dt_effective,
            extra={
                "sup_l2_error": tracker.sup["l2"],
                "sup_linf_error": tracker.sup["linf"],
                "sup_corrected_error": tracker.sup["corrected"],
                "sup_corrected_l2_error": tracker.sup["corrected_l2"],
                "sup_R_hs": tracker.sup["R_hs"],
                "truncated_fraction": start.truncated_fraction,
                "seam_ratio": seam,
                "stability_bound": runlog.stability_bound,
                "dt_evidence": selection.evidence,
                "dt_converged": selection.converged,
                "notes": runlog.notes,
            },
        )

    def criteria(self, report: ScalingReport) -> List[Criterion]:
        return [
            slope_criterion("hs_error_slope", report.fit, low=MIN_SLOPE),
            slope_criterion("l2_error_slope", report.companion_fits.get("sup_l2_error"), low=MIN_SLOPE),
        ]
