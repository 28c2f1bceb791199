"""
Reports written by the experiments: scaling tables with their log-log fits,
property-suite verdicts and single-run summaries. JSON and CSV writers plus
an optional log-log plot.
"""
import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from app.core.errors import FitError
from app.lab_config import get_logger

log = get_logger("report")

CSV_HEADER = ["eps", "metric", "t_of_sup", "grid_n", "dt"]


@dataclass
class SlopeFit:
    slope: float
    intercept: float
    r_squared: float
    n: int


def fit_slope(rows: Sequence[Tuple[float, float]]) -> SlopeFit:
    """Least squares on (log eps, log value)."""
    if len(rows) < 2:
        raise FitError(f"a slope needs at least 2 rows, got {len(rows)}")
    eps = np.array([r[0] for r in rows], dtype=float)
    values = np.array([r[1] for r in rows], dtype=float)
    if np.any(eps <= 0.0) or np.any(values <= 0.0) or not np.all(np.isfinite(values)):
        raise FitError("log-log fit needs positive finite values")
    x, y = np.log(eps), np.log(values)
    if np.ptp(x) == 0.0:
        raise FitError("all rows share one eps; the slope is undefined")
    if np.ptp(y) == 0.0:
        return SlopeFit(0.0, float(y[0]), 1.0, len(rows))
    result = stats.linregress(x, y)
    return SlopeFit(float(result.slope), float(result.intercept), float(result.rvalue ** 2), len(rows))


@dataclass
class Criterion:
    name: str
    passed: bool
    measured: Optional[float]
    target: str


@dataclass
class ScalingRow:
    eps: float
    metric: float
    t_of_sup: float
    grid_n: int
    dt: float
    status: str = "ok"
    message: str = ""
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def _fmt(value: float) -> str:
    return f"{value:.12e}"


@dataclass
class ScalingReport:
    experiment: str
    metric_name: str
    rows: List[ScalingRow]
    fit: Optional[SlopeFit]
    companion_fits: Dict[str, SlopeFit] = field(default_factory=dict)
    criteria: List[Criterion] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.criteria) and all(c.passed for c in self.criteria)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiment": self.experiment,
            "metric_name": self.metric_name,
            "rows": [asdict(r) for r in self.rows],
            "fit": asdict(self.fit) if self.fit else None,
            "companion_fits": {k: asdict(v) for k, v in self.companion_fits.items()},
            "criteria": [asdict(c) for c in self.criteria],
            "passed": self.passed,
            "metadata": self.metadata,
        }

    def write_csv(self, path: str):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for r in self.rows:
                writer.writerow([_fmt(r.eps), _fmt(r.metric), _fmt(r.t_of_sup), r.grid_n, _fmt(r.dt)])

    def write_json(self, path: str):
        write_json(self.to_dict(), path)

    def write(self, out_dir: str, plot: bool = False) -> List[str]:
        os.makedirs(out_dir, exist_ok=True)
        base = os.path.join(out_dir, self.experiment)
        paths = [f"{base}.csv", f"{base}.json"]
        self.write_csv(paths[0])
        self.write_json(paths[1])
        if plot:
            paths.append(plot_scaling(self, f"{base}.png"))
        return paths


@dataclass
class PropertyCheck:
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: Dict[str, Any] = field(default_factory=dict)


@dataclass
class PropertyReport:
    experiment: str
    checks: List[PropertyCheck]
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> List[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiment": self.experiment,
            "checks": [asdict(c) for c in self.checks],
            "passed": self.passed,
            "metadata": self.metadata,
        }

    def write(self, out_dir: str, plot: bool = False) -> List[str]:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, f"{self.experiment}.json")
        write_json(self.to_dict(), path)
        return [path]


@dataclass
class SimulationReport:
    experiment: str
    runlog: Dict[str, Any]
    criteria: List[Criterion]
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiment": self.experiment,
            "runlog": self.runlog,
            "criteria": [asdict(c) for c in self.criteria],
            "passed": self.passed,
            "metadata": self.metadata,
        }

    def write(self, out_dir: str, plot: bool = False) -> List[str]:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "runlog.json")
        write_json(self.to_dict(), path)
        return [path]


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def json_safe(value):
    """Plain-JSON copy of a report dict: numpy scalars unwrapped, non-finite floats to None."""
    if isinstance(value, dict):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, np.ndarray):
        return json_safe(value.tolist())
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_json(data: Dict[str, Any], path: str):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, ensure_ascii=False, indent=2, default=_jsonable)


def plot_scaling(report: ScalingReport, path: str) -> str:
    """Log-log plot of the metric (and companions) against eps."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = [r for r in report.rows if r.ok and r.metric > 0.0]
    fig, ax = plt.subplots(figsize=(5, 4))
    eps = np.array([r.eps for r in rows])
    ax.loglog(eps, [r.metric for r in rows], "o-", label=report.metric_name)
    for name in report.companion_fits:
        values = [r.extra.get(name) for r in rows]
        if all(v is not None and v > 0.0 for v in values):
            ax.loglog(eps, values, "s--", label=name)
    if report.fit is not None:
        ax.set_title(f"{report.experiment}: slope {report.fit.slope:.3f}")
    ax.set_xlabel("eps")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    log.info(f"📈 [Report] plot written to {path}")
    return path
