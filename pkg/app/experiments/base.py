import platform
import time
from abc import ABC, abstractmethod
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import scipy

from app.core.errors import FitError, LabError
from app.core.nls import Envelope, carrier_grid, load_envelope_file, slow_grid_for
from app.core.solver import DtSelection, SolverConfig, self_converged_dt
from app.core.spectral import Field, Grid1D, random_field, sobolev_norm
from app.experiments.config import ExperimentConfig
from app.experiments.report import Criterion, ScalingReport, ScalingRow, SlopeFit, fit_slope
from app.lab_config import get_logger

log = get_logger("experiments")

# a scaling fit needs this many surviving rows
MIN_FIT_ROWS = 3


class BaseExperiment(ABC):
    name: str = ""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.params = config.carrier()

    @abstractmethod
    def run(self):
        """Execute the experiment and return its report."""
        pass

    def metadata(self, started: float) -> Dict[str, Any]:
        return {
            "config_hash": self.config.config_hash(),
            "config": self.config.model_dump(mode="json"),
            "carrier": self.params.as_dict(),
            "versions": {
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "wall_time": time.perf_counter() - started,
        }

    # --- shared setup ---

    def fast_grid(self, eps: float) -> Grid1D:
        c = self.config
        return carrier_grid(eps, c.k0, c.length_factor, c.k_resolve, c.grid_n)

    def periodic_grid(self) -> Grid1D:
        """Grid for experiments on generic small data: L = 2 pi * domain_periods."""
        return Grid1D(self.config.grid_n or 256, 2.0 * np.pi * self.config.domain_periods)

    def initial_envelope(self, fast_grid: Grid1D, eps: float) -> Envelope:
        c = self.config
        slow = slow_grid_for(fast_grid, eps, c.slow_points)
        if c.envelope == "file":
            X, A = load_envelope_file(c.envelope_file)
            return Envelope.from_profile(slow, X, c.envelope_amplitude * A)
        return Envelope.gaussian(slow, c.envelope_amplitude, c.envelope_width)

    def random_initial(self, grid: Grid1D, eps: float) -> Field:
        """Seeded random trigonometric polynomial scaled to ||u0||_{H^2} = eps; same shape for every eps."""
        rng = np.random.default_rng(self.config.seed)
        u = random_field(grid, rng, self.config.random_modes)
        return u * (eps / sobolev_norm(u, 2))

    def solver_config(self, dt: float, t_end: float, nonlinear: Optional[bool] = None) -> SolverConfig:
        c = self.config
        return SolverConfig(
            dt=dt,
            t_end=t_end,
            observer_stride=max(1, int(round(c.observer_interval / dt))),
            hilbert=c.hilbert,
            nonlinear=c.nonlinear if nonlinear is None else nonlinear,
        )

    def select_dt(self, measure: Callable[[float], Tuple[float, Any]]) -> DtSelection:
        """Fixed dt, or halving until the metric moves by less than 5%."""
        c = self.config
        if c.dt_rule == "self_convergence":
            return self_converged_dt(measure, c.dt, tolerance=0.05, max_halvings=c.max_halvings)
        metric, payload = measure(c.dt)
        return DtSelection(c.dt, metric, payload, False, [{"dt": c.dt, "metric": metric}])


def _measure_worker(experiment_cls, config: ExperimentConfig, eps: float) -> ScalingRow:
    return experiment_cls(config).measure_safely(eps)


class ScalingExperiment(BaseExperiment):
    """One measurement per eps, fitted in log-log, judged by criteria."""

    metric_name: str = "metric"
    companions: Tuple[str, ...] = ()

    @abstractmethod
    def measure(self, eps: float) -> ScalingRow:
        pass

    @abstractmethod
    def criteria(self, report: ScalingReport) -> List[Criterion]:
        pass

    def measure_safely(self, eps: float) -> ScalingRow:
        try:
            return self.measure(eps)
        except (LabError, FloatingPointError, ValueError) as e:
            log.error(f"❌ [Experiments] {self.name} at eps={eps:g} error: {e}")
            return ScalingRow(eps, float("nan"), float("nan"), 0, float("nan"), status="failed", message=str(e))

    def _collect(self) -> List[ScalingRow]:
        eps_list = self.config.eps_list
        workers = min(self.config.workers, len(eps_list))
        if workers <= 1:
            return [self.measure_safely(eps) for eps in eps_list]
        log.info(f"🧪 [Experiments] {self.name}: {len(eps_list)} runs on {workers} workers")
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_measure_worker, type(self), self.config, eps) for eps in eps_list]
            return [f.result() for f in futures]

    def _fit(self, rows: List[ScalingRow], key: Optional[str] = None) -> Optional[SlopeFit]:
        pairs = [(r.eps, r.metric if key is None else r.extra.get(key)) for r in rows if r.ok]
        pairs = [(e, v) for e, v in pairs if v is not None]
        if len(pairs) < MIN_FIT_ROWS:
            return None
        try:
            return fit_slope(pairs)
        except FitError as e:
            log.warning(f"⚠️ [Experiments] {self.name}: no fit for {key or self.metric_name}: {e}")
            return None

    def run(self) -> ScalingReport:
        started = time.perf_counter()
        flagged = self.config.preasymptotic_eps()
        if flagged:
            log.warning(f"⚠️ [Experiments] eps {flagged} not below delta={self.params.delta:g}: preasymptotic regime")
        rows = self._collect()
        report = ScalingReport(self.name, self.metric_name, rows, self._fit(rows))
        for key in self.companions:
            fit = self._fit(rows, key)
            if fit is not None:
                report.companion_fits[key] = fit
        report.metadata = self.metadata(started)
        report.metadata["preasymptotic_eps"] = flagged
        report.criteria = self.criteria(report)
        verdict = "✅ passed" if report.passed else "❌ failed"
        slope = f"{report.fit.slope:.3f}" if report.fit else "undefined"
        log.info(f"🧪 [Experiments] {self.name}: slope {slope}, {verdict}")
        return report


def slope_criterion(name: str, fit: Optional[SlopeFit], low: Optional[float] = None,
                    high: Optional[float] = None) -> Criterion:
    target = " and ".join(t for t in (f">= {low}" if low is not None else "",
                                      f"<= {high}" if high is not None else "") if t)
    if fit is None:
        return Criterion(name, False, None, target)
    ok = (low is None or fit.slope >= low) and (high is None or fit.slope <= high)
    return Criterion(name, ok, fit.slope, target)


def spread_criterion(name: str, values: List[float], limit: float) -> Criterion:
    """max/min of positive values below limit."""
    values = [abs(v) for v in values if np.isfinite(v)]
    if len(values) < 2 or min(values) == 0.0:
        return Criterion(name, False, None, f"< {limit}")
    spread = max(values) / min(values)
    return Criterion(name, spread < limit, spread, f"< {limit}")
