"""
Long-time existence surrogate: for ||u0||_{H^2} = eps, the growth
sup_{t <= a/eps^2} ||u(t)||_{H^s} / ||u0||_{H^s} should not depend on eps.

A linear-only control run with the same data must keep the ratio at 1.
"""
import math
from typing import List, Optional, Tuple

from app.core.solver import RunLog, run
from app.core.spectral import Field, sobolev_norm
from app.experiments.base import ScalingExperiment, log, spread_criterion
from app.experiments.report import Criterion, ScalingReport, ScalingRow


# e^{K0 t} is an isometry on every H^s
LINEAR_CONTROL_TOL = 1e-8


class ExistenceExperiment(ScalingExperiment):
    name = "existence"
    metric_name = "sup_hs_ratio"
    companions = ("sup_hs_ratio_doubled",)

    def sup_ratio(self, u0: Field, dt: float, t_end: float,
                  nonlinear: Optional[bool] = None) -> Tuple[float, float, RunLog]:
        """(sup ratio, time of sup, run log)."""
        s = self.config.s
        base = sobolev_norm(u0, s)
        best = {"ratio": 1.0, "t": 0.0}

        def observe(state):
            ratio = sobolev_norm(state.u, s) / base
            if ratio > best["ratio"]:
                best["ratio"], best["t"] = ratio, state.t
            return {"hs_ratio": ratio}

        runlog = run(u0, self.solver_config(dt, t_end, nonlinear), [observe])
        return best["ratio"], best["t"], runlog

    def linear_control(self, u0: Field, dt: float, t_end: float) -> float:
        """max |ratio - 1| along the linear flow."""
        s = self.config.s
        base = sobolev_norm(u0, s)
        worst = {"defect": 0.0}

        def observe(state):
            defect = abs(sobolev_norm(state.u, s) / base - 1.0)
            worst["defect"] = max(worst["defect"], defect)
            return {"hs_defect": defect}

        run(u0, self.solver_config(dt, t_end, nonlinear=False), [observe])
        return worst["defect"]

    def measure(self, eps: float) -> ScalingRow:
        c = self.config
        grid = self.periodic_grid()
        u0 = self.random_initial(grid, eps)
        t_end = c.a_factor / eps ** 2

        def measure_dt(dt):
            ratio, t_sup, runlog = self.sup_ratio(u0, dt, t_end)
            return ratio, (ratio, t_sup, runlog)

        selection = self.select_dt(measure_dt)
        ratio, t_sup, runlog = selection.payload
        doubled, t_doubled, _ = self.sup_ratio(2.0 * u0, selection.dt, t_end)
        control = self.linear_control(u0, selection.dt, t_end)
        if doubled > ratio:
            log.info(f"🧪 [Existence] eps={eps:g}: doubling u0 raises the growth {ratio:.4f} -> {doubled:.4f}")
        return ScalingRow(
            eps=eps,
            metric=ratio,
            t_of_sup=t_sup,
            grid_n=grid.num_points,
            dt=runlog.dt_effective,
            extra={
                "sup_hs_ratio_doubled": doubled,
                "t_of_sup_doubled": t_doubled,
                "linear_control_defect": control,
                "stability_bound": runlog.stability_bound,
                "dt_evidence": selection.evidence,
                "dt_converged": selection.converged,
                "notes": runlog.notes,
            },
        )

    def criteria(self, report: ScalingReport) -> List[Criterion]:
        ok = [r for r in report.rows if r.ok]
        control = max((r.extra["linear_control_defect"] for r in ok), default=math.inf)
        return [
            spread_criterion("hs_ratio_spread", [r.metric for r in ok], self.config.growth_threshold),
            Criterion("linear_control_isometry", control < LINEAR_CONTROL_TOL, control, f"< {LINEAR_CONTROL_TOL:g}"),
        ]
