import math

import numpy as np
import pytest

from app.core.errors import ParameterRangeError, SolverDivergenceError
from app.core.solver import (
    SimulationState,
    SolverConfig,
    rhs_nonlinear,
    rhs_nonlinear_divergence,
    run,
    self_converged_dt,
    stability_bound,
    step,
    time_reversal_defect,
)
from app.core.spectral import Field, integrate, l2_norm


def _cosine(grid, amplitude=1.0, mode=1):
    return Field.from_function(grid, lambda x: amplitude * np.cos(mode * x))


def test_linear_flow_is_exact(unit_grid):
    u0 = _cosine(unit_grid)
    out = run(u0, SolverConfig(dt=0.1, t_end=3.0, nonlinear=False)).final_state.u
    expected = np.cos(unit_grid.x - math.tanh(1.0) * 3.0)
    assert np.max(np.abs(out.samples - expected)) < 1e-12


def test_hilbert_linear_flow(unit_grid):
    u0 = _cosine(unit_grid, mode=3)
    out = run(u0, SolverConfig(dt=0.1, t_end=2.0, nonlinear=False, hilbert=True)).final_state.u
    assert np.max(np.abs(out.samples - np.cos(3 * unit_grid.x - 2.0))) < 1e-12


def test_conservation_over_long_run(unit_grid):
    u0 = Field.from_function(unit_grid, lambda x: 0.05 * (np.cos(x) + 0.5 * np.sin(2 * x)))
    mass0, l2_0 = integrate(u0), l2_norm(u0)

    def observe(state):
        return {"mass": integrate(state.u), "l2": l2_norm(state.u)}

    runlog = run(u0, SolverConfig(dt=0.02, t_end=50.0, observer_stride=100), [observe])
    _, mass = runlog.series("mass")
    _, l2 = runlog.series("l2")
    assert np.max(np.abs(mass - mass0)) < 1e-12
    assert np.max(np.abs(l2 - l2_0)) / l2_0 < 1e-6
    assert runlog.final_state.t == pytest.approx(50.0)


def test_step_shrinks_to_land_on_t_end(unit_grid):
    runlog = run(_cosine(unit_grid, 0.1), SolverConfig(dt=0.3, t_end=1.0))
    assert runlog.n_steps == 4
    assert runlog.dt_effective == pytest.approx(0.25)
    assert runlog.final_state.t == 1.0
    assert runlog.final_state.step_count == 4


def test_observer_schedule(unit_grid):
    seen = []
    runlog = run(_cosine(unit_grid, 0.1), SolverConfig(dt=0.1, t_end=1.0, observer_stride=3),
                 [lambda state: seen.append(state.step_count)])
    assert seen == [0, 3, 6, 9, 10]
    assert [r["step"] for r in runlog.records] == seen


def test_zero_length_run(unit_grid):
    runlog = run(_cosine(unit_grid), SolverConfig(dt=0.1, t_end=0.0))
    assert runlog.n_steps == 0
    assert len(runlog.records) == 1
    assert runlog.final_state.t == 0.0


def test_single_step_agrees_with_run(unit_grid):
    u0 = _cosine(unit_grid, 0.3)
    config = SolverConfig(dt=0.05, t_end=0.05)
    one = step(SimulationState(0.0, u0), config)
    assert one.step_count == 1
    assert np.allclose(one.u.samples, run(u0, config).final_state.u.samples, atol=1e-15)


def test_fourth_order_convergence(unit_grid):
    u0 = _cosine(unit_grid, 0.3)
    reference = run(u0, SolverConfig(dt=0.0025, t_end=1.0)).final_state.u

    def error(dt):
        return l2_norm(run(u0, SolverConfig(dt=dt, t_end=1.0)).final_state.u - reference)

    ratio = error(0.04) / error(0.02)
    assert 10.0 < ratio < 22.0


def test_divergence_is_reported(unit_grid):
    samples = np.cos(unit_grid.x)
    samples[5] = np.nan
    with pytest.raises(SolverDivergenceError) as info:
        run(Field(unit_grid, samples), SolverConfig(dt=0.1, t_end=0.5))
    assert info.value.step == 1


def test_invalid_inputs(unit_grid):
    with pytest.raises(ParameterRangeError):
        SolverConfig(dt=0.0)
    with pytest.raises(ParameterRangeError):
        SolverConfig(t_end=-1.0)
    with pytest.raises(ParameterRangeError):
        SolverConfig(observer_stride=0)
    with pytest.raises(ParameterRangeError):
        run(Field(unit_grid, np.exp(1j * unit_grid.x), real=False), SolverConfig())


def test_stability_bound_note(unit_grid):
    u0 = _cosine(unit_grid, 5.0)
    assert stability_bound(u0) == pytest.approx(2.8 / (5.0 * 21.0))
    assert stability_bound(Field.zeros(unit_grid)) == math.inf
    runlog = run(u0, SolverConfig(dt=0.05, t_end=0.05))
    assert runlog.notes and "stability bound" in runlog.notes[0]
    assert "notes" in runlog.to_dict()


def test_nonlinear_forms_agree(unit_grid):
    u = Field.from_function(unit_grid, lambda x: np.cos(x) + np.sin(2 * x))
    assert np.allclose(rhs_nonlinear(u).samples, rhs_nonlinear_divergence(u).samples, atol=1e-13)


def test_time_reversal(unit_grid):
    u0 = Field.from_function(unit_grid, lambda x: 0.1 * np.cos(x) + 0.05 * np.sin(3 * x))
    assert time_reversal_defect(u0, SolverConfig(dt=0.01, t_end=1.0)) < 1e-6


def test_self_converged_dt():
    quick = self_converged_dt(lambda dt: (1.0 + dt ** 2, dt), dt0=0.1)
    assert quick.converged
    assert quick.dt == pytest.approx(0.05)
    assert quick.payload == pytest.approx(0.05)
    assert len(quick.evidence) == 2

    stuck = self_converged_dt(lambda dt: (1.0 / dt, None), dt0=0.1, max_halvings=3)
    assert not stuck.converged
    assert stuck.dt == pytest.approx(0.0125)
    assert len(stuck.evidence) == 4


def test_runlog_json(unit_grid):
    runlog = run(_cosine(unit_grid, 0.1), SolverConfig(dt=0.1, t_end=0.2),
                 [lambda state: {"l2": l2_norm(state.u)}])
    text = runlog.to_json()
    assert '"final_t": 0.2' in text
    assert runlog.config["linear"] == "K0"
