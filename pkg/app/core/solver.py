"""
PDE Solver
Time integration of d_t u = K0 u - u d_x u on the periodic grid.

The linear part is diagonal in Fourier space and is propagated exactly; the
dealiased advection term is advanced with classical RK4 in the
integrating-factor variables (Lawson RK4).
"""
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.fft import fft, ifft

from app.core import multipliers
from app.core.errors import ParameterRangeError, SolverDivergenceError
from app.core.multipliers import Multiplier
from app.core.spectral import Field, Grid1D, dealiased_product, derivative, l2_norm, reflect
from app.lab_config import DEFAULT_DT, get_logger

log = get_logger("solver")

# RK4 reaches about 2.8 along the imaginary axis
RK4_IMAG_STABILITY = 2.8


class Scheme(str, Enum):
    INTEGRATING_FACTOR_RK4 = "integrating_factor_rk4"


@dataclass
class SolverConfig:
    """Time-stepping options for one run."""

    dt: float = DEFAULT_DT
    t_end: float = 1.0
    scheme: Scheme = Scheme.INTEGRATING_FACTOR_RK4
    observer_stride: int = 1
    linear_symbol: Optional[Multiplier] = None  # K0 on the run grid when None
    hilbert: bool = False  # only consulted when linear_symbol is None
    nonlinear: bool = True

    def __post_init__(self):
        self.scheme = Scheme(self.scheme)
        if not self.dt > 0.0:
            raise ParameterRangeError(f"dt must be positive, got {self.dt}")
        if not self.t_end >= 0.0:
            raise ParameterRangeError(f"t_end must be nonnegative, got {self.t_end}")
        if int(self.observer_stride) < 1:
            raise ParameterRangeError(f"observer_stride must be >= 1, got {self.observer_stride}")
        self.observer_stride = int(self.observer_stride)

    def linear_for(self, grid: Grid1D) -> Multiplier:
        if self.linear_symbol is not None:
            if self.linear_symbol.grid != grid:
                raise ParameterRangeError("linear_symbol was sampled on a different grid")
            return self.linear_symbol
        return multipliers.k0(grid, hilbert=self.hilbert)

    def summary(self) -> Dict[str, Any]:
        return {
            "dt": self.dt,
            "t_end": self.t_end,
            "scheme": self.scheme.value,
            "observer_stride": self.observer_stride,
            "linear": self.linear_symbol.name if self.linear_symbol is not None else ("H" if self.hilbert else "K0"),
            "nonlinear": self.nonlinear,
        }


@dataclass(frozen=True)
class SimulationState:
    t: float
    u: Field
    step_count: int = 0


Observer = Callable[[SimulationState], Optional[Dict[str, float]]]


@dataclass
class RunLog:
    """Everything a run leaves behind; JSON-serializable through to_dict()."""

    config: Dict[str, Any]
    grid: Dict[str, float]
    dt_effective: float
    n_steps: int
    stability_bound: float
    records: List[Dict[str, float]] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    final_state: Optional[SimulationState] = None

    def series(self, key: str) -> Tuple[np.ndarray, np.ndarray]:
        rows = [r for r in self.records if key in r]
        return np.array([r["t"] for r in rows]), np.array([r[key] for r in rows])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "config": self.config,
            "grid": self.grid,
            "dt_effective": self.dt_effective,
            "n_steps": self.n_steps,
            "stability_bound": self.stability_bound,
            "records": self.records,
            "notes": self.notes,
            "final_t": self.final_state.t if self.final_state else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


class _LawsonRK4:
    """Integrating-factor RK4 on the unnormalized FFT of u."""

    def __init__(self, grid: Grid1D, config: SolverConfig, dt: float):
        self.dt = dt
        self.nonlinear = config.nonlinear
        symbol = config.linear_for(grid).symbol_values
        self.half = np.exp(0.5 * dt * symbol)
        self.full = self.half * self.half
        self.mask = grid.dealias_mask.astype(float)
        self.ik = grid.sample_symbol(lambda k: 1j * k)

    def advection_hat(self, v: np.ndarray) -> np.ndarray:
        vb = v * self.mask
        u = ifft(vb).real
        ux = ifft(vb * self.ik).real
        return -fft(u * ux) * self.mask

    def __call__(self, v: np.ndarray) -> np.ndarray:
        E, E2, dt = self.half, self.full, self.dt
        if not self.nonlinear:
            return E2 * v
        a = dt * self.advection_hat(v)
        b = dt * self.advection_hat(E * (v + 0.5 * a))
        c = dt * self.advection_hat(E * v + 0.5 * b)
        d = dt * self.advection_hat(E2 * v + E * c)
        return E2 * v + (E2 * a + 2.0 * E * (b + c) + d) / 6.0


def rhs_nonlinear(u: Field) -> Field:
    """-u d_x u, product form (the one used for stepping)."""
    return -dealiased_product(u, derivative(u, 1))


def rhs_nonlinear_divergence(u: Field) -> Field:
    """-(1/2) d_x (u^2), divergence form (the one used for conservation checks)."""
    return -0.5 * derivative(dealiased_product(u, u), 1)


def stability_bound(u: Field) -> float:
    """Advective RK4 bound dt <= 2.8 / (max|u| k_dealias)."""
    peak = u.max_abs()
    if peak == 0.0:
        return math.inf
    return RK4_IMAG_STABILITY / (peak * u.grid.dealias_wavenumber)


def step(state: SimulationState, config: SolverConfig) -> SimulationState:
    """One Lawson-RK4 step of size config.dt."""
    stepper = _LawsonRK4(state.u.grid, config, config.dt)
    v = stepper(fft(state.u.samples))
    if not np.all(np.isfinite(v)):
        raise SolverDivergenceError(state.t + config.dt, state.step_count + 1)
    return SimulationState(state.t + config.dt, Field(state.u.grid, ifft(v).real), state.step_count + 1)


def _observe(records: List[Dict[str, float]], observers: Sequence[Observer], state: SimulationState):
    record: Dict[str, float] = {"t": state.t, "step": state.step_count}
    for observer in observers:
        out = observer(state)
        if out:
            record.update(out)
    records.append(record)


def run(initial: Field, config: SolverConfig, observers: Sequence[Observer] = ()) -> RunLog:
    """
    Advance `initial` to config.t_end.

    The step is shrunk to t_end / ceil(t_end / dt) so the run lands on t_end
    exactly. Observers see the state at step 0, every observer_stride steps,
    and at the final step.
    """
    if not initial.real:
        raise ParameterRangeError("the solver evolves real fields only")
    grid = initial.grid
    n_steps = int(math.ceil(config.t_end / config.dt - 1e-12)) if config.t_end > 0 else 0
    dt = config.t_end / n_steps if n_steps else config.dt
    bound = stability_bound(initial)
    runlog = RunLog(
        config=config.summary(),
        grid={"num_points": grid.num_points, "length": grid.length},
        dt_effective=dt,
        n_steps=n_steps,
        stability_bound=bound,
    )
    if config.nonlinear and dt > bound:
        note = f"dt={dt:.4g} exceeds the advective stability bound {bound:.4g}"
        runlog.notes.append(note)
        log.warning(f"⚠️ [PDE-Solver] {note}")

    state = SimulationState(0.0, initial, 0)
    _observe(runlog.records, observers, state)
    if n_steps == 0:
        runlog.final_state = state
        return runlog

    stepper = _LawsonRK4(grid, config, dt)
    v = fft(initial.samples)
    log.debug(f"[PDE-Solver] {n_steps} steps of dt={dt:.4g} on N={grid.num_points}, L={grid.length:.4g}")
    for n in range(1, n_steps + 1):
        v = stepper(v)
        if not np.all(np.isfinite(v)):
            log.error(f"❌ [PDE-Solver] non-finite state at step {n}")
            raise SolverDivergenceError(n * dt, n)
        if n % config.observer_stride == 0 or n == n_steps:
            state = SimulationState(n * dt, Field(grid, ifft(v).real), n)
            _observe(runlog.records, observers, state)

    runlog.final_state = state
    log.info(f"🌊 [PDE-Solver] reached t={state.t:.4g} after {n_steps} steps")
    return runlog


@dataclass
class DtSelection:
    dt: float
    metric: float
    payload: Any
    converged: bool
    evidence: List[Dict[str, float]]


def self_converged_dt(measure: Callable[[float], Tuple[float, Any]], dt0: float = DEFAULT_DT,
                      tolerance: float = 0.05, max_halvings: int = 3) -> DtSelection:
    """
    Halve dt until the measured metric changes by less than `tolerance`
    (relative) between consecutive step sizes. `measure(dt)` returns
    (metric, payload); the finer of the two agreeing runs is kept.
    """
    metric, payload = measure(dt0)
    evidence = [{"dt": dt0, "metric": metric}]
    dt = dt0
    for _ in range(max_halvings):
        dt *= 0.5
        finer, finer_payload = measure(dt)
        evidence.append({"dt": dt, "metric": finer})
        change = abs(finer - metric) / max(abs(finer), 1e-300)
        metric, payload = finer, finer_payload
        if change < tolerance:
            return DtSelection(dt, metric, payload, True, evidence)
    log.warning(f"⚠️ [PDE-Solver] metric still moving after {max_halvings} halvings (dt={dt:.4g})")
    return DtSelection(dt, metric, payload, False, evidence)


def time_reversal_defect(initial: Field, config: SolverConfig) -> float:
    """
    u(x, t) -> u(-x, -t) maps solutions to solutions, so evolving the
    reflected end state for the same time and reflecting again must return
    the initial data. Returns the relative L2 distance.
    """
    forward = run(initial, config).final_state.u
    back = run(reflect(forward), config).final_state.u
    return l2_norm(reflect(back) - initial) / l2_norm(initial)
