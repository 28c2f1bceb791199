"""
Energy drift: exponential growth rate rho of E_s(t) along small solutions,
expected to scale like eps^2.

Only growth counts: a negative fitted rate is integrator noise on a conserved
energy and is clamped to zero before normalizing by eps^2.
"""
import math
from typing import List

from app.core.energy import energy_drift_study
from app.experiments.base import ScalingExperiment, spread_criterion
from app.experiments.report import Criterion, ScalingReport, ScalingRow

RATE_SPREAD = 3.0
RATE_BOUND = 10.0
# rho / eps^2 below this is not resolvable above the time-integrator floor
RESOLVED_RATE = 1e-4


def clamped_rate(rate: float, eps: float) -> float:
    return max(rate, 0.0) / eps ** 2


class EnergyDriftExperiment(ScalingExperiment):
    name = "energy_drift"
    metric_name = "rate_over_eps2"
    companions = ("max_growth",)

    def measure(self, eps: float) -> ScalingRow:
        c = self.config
        grid = self.periodic_grid()
        u0 = self.random_initial(grid, eps)
        t_end = c.a_factor / eps ** 2

        def measure_dt(dt):
            series = energy_drift_study(u0, self.solver_config(dt, t_end), c.s)
            return series.rate, series

        selection = self.select_dt(measure_dt)
        series = selection.payload
        peak = int(series.values.argmax())
        return ScalingRow(
            eps=eps,
            metric=clamped_rate(series.rate, eps),
            t_of_sup=float(series.times[peak]),
            grid_n=grid.num_points,
            dt=series.runlog.dt_effective,
            extra={
                "rate": series.rate,
                "max_growth": series.max_growth,
                "dt_evidence": selection.evidence,
                "dt_converged": selection.converged,
            },
        )

    def criteria(self, report: ScalingReport) -> List[Criterion]:
        ok = [r for r in report.rows if r.ok]
        growth = max((r.extra["max_growth"] for r in ok), default=math.inf)
        bound = max((r.metric for r in ok), default=math.inf) if len(ok) == len(report.rows) else math.inf
        resolved = [r.metric for r in ok if r.metric > RESOLVED_RATE]
        if len(resolved) >= 2:
            spread = spread_criterion("rate_over_eps2_spread", resolved, RATE_SPREAD)
        else:
            spread = Criterion("rate_over_eps2_spread", bool(ok), None,
                               f"< {RATE_SPREAD} (fewer than two rates above {RESOLVED_RATE:g})")
        return [
            Criterion("rate_over_eps2_bounded", bool(ok) and bound <= RATE_BOUND, bound, f"<= {RATE_BOUND}"),
            spread,
            Criterion("growth_below_e", bool(ok) and growth <= math.e, growth, f"<= {math.e:.6f}"),
        ]
