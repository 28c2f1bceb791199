"""
Single PDE run from eps psi(0) at the first eps of the config, with the
conservation laws and the packet motion recorded along the way.
"""
import time

import numpy as np
from scipy import stats

from app.core.nls import assemble_psi
from app.core.solver import run
from app.core.spectral import integrate, l2_norm, packet_center, seam_ratio, sobolev_norm
from app.experiments.base import BaseExperiment, log
from app.experiments.report import Criterion, SimulationReport

MASS_TOL = 1e-10
L2_TOL = 1e-6
# relative deviation of the packet center speed from c_g
SPEED_TOL = 0.02


class SimulateExperiment(BaseExperiment):
    name = "simulate"

    def run(self) -> SimulationReport:
        started = time.perf_counter()
        c, params = self.config, self.params
        eps = c.eps_list[0]
        grid = self.fast_grid(eps)
        env = self.initial_envelope(grid, eps)
        u0 = assemble_psi(env, 0.0, eps, params, c.order, grid, cutoff=c.packet_cutoff).eps_psi
        mass_scale = grid.spacing * float(np.sum(np.abs(u0.samples)))
        mass0, l2_0 = integrate(u0), l2_norm(u0)

        def observe(state):
            u = state.u
            return {
                "mass": integrate(u),
                "l2": l2_norm(u),
                "hs": sobolev_norm(u, c.s),
                "center": packet_center(u),
                "seam_ratio": seam_ratio(u, packet_center(u)),
            }

        runlog = run(u0, self.solver_config(c.dt, c.T0 / eps ** 2), [observe])
        _, mass = runlog.series("mass")
        _, l2 = runlog.series("l2")
        mass_drift = float(np.max(np.abs(mass - mass0))) / mass_scale if mass_scale else 0.0
        l2_drift = float(np.max(np.abs(l2 - l2_0))) / l2_0 if l2_0 else 0.0

        times, centers = runlog.series("center")
        unwrapped = np.unwrap(centers * 2.0 * np.pi / grid.length) * grid.length / (2.0 * np.pi)
        speed = float(stats.linregress(times, unwrapped).slope) if len(times) > 2 else float("nan")
        speed_defect = abs(speed - params.cg) / params.cg if np.isfinite(speed) else float("nan")
        log.info(f"🌊 [Simulate] eps={eps:g}: L2 drift {l2_drift:.2e}, packet speed {speed:.4f} (cg={params.cg:.4f})")

        report = SimulationReport(
            experiment=self.name,
            runlog=runlog.to_dict(),
            criteria=[
                Criterion("mass_conservation", mass_drift < MASS_TOL, mass_drift, f"< {MASS_TOL}"),
                Criterion("l2_conservation", l2_drift < L2_TOL, l2_drift, f"< {L2_TOL}"),
                Criterion("group_velocity", bool(speed_defect < SPEED_TOL), speed_defect, f"< {SPEED_TOL}"),
            ],
        )
        report.metadata = self.metadata(started)
        report.metadata.update({"eps": eps, "packet_speed": speed, "group_velocity": params.cg})
        return report
