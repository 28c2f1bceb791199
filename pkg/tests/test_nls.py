import math

import numpy as np
import pytest

from app.core.energy import check_packet_support
from app.core.errors import GridMismatchError, InvalidSamplesError, ParameterRangeError
from app.core.nls import (
    AnsatzOrder,
    Envelope,
    assemble_psi,
    carrier_grid,
    carrier_mode,
    corrector_a0,
    corrector_a2,
    evolve_envelope,
    load_envelope_file,
    nls_profile,
    nls_rhs,
    psi_time_derivative,
    residual,
    slow_grid_for,
)
from app.core.spectral import Grid1D, l2_norm
from app.experiments.report import fit_slope


def test_carrier_grid_puts_k0_on_the_grid():
    grid = carrier_grid(0.1, 1.0)
    assert grid.length == pytest.approx(2.0 * math.pi * 51)
    assert grid.num_points == 2048
    assert carrier_mode(grid, 1.0) == 51
    assert grid.dealias_wavenumber >= 10.0
    with pytest.raises(GridMismatchError):
        carrier_mode(grid, 1.01)
    with pytest.raises(ParameterRangeError):
        carrier_grid(1.5, 1.0)


def test_correctors_solve_their_equations(params, rng):
    A1 = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    A2 = corrector_a2(A1, params)
    A0 = corrector_a0(A1, params)
    assert np.allclose((2.0 * params.omega0 - math.tanh(2.0 * params.k0)) * A2, params.k0 * A1 ** 2)
    assert np.allclose((1.0 - params.cg) * A0, -np.abs(A1) ** 2)
    assert corrector_a2(1.0, params) == pytest.approx(1.78839, abs=1e-4)
    assert corrector_a0(1.0, params) == pytest.approx(-1.72406, abs=1e-4)


def test_plane_wave_envelope_rotates(params):
    slow = Grid1D(64, 20.0)
    env = Envelope(slow, Envelope.gaussian(slow).A * 0.0 + 0.5)
    out = evolve_envelope(env, 1.0, params, dT_max=0.01)
    assert out.T == 1.0
    assert np.allclose(out.A.samples, 0.5 * np.exp(1j * params.nu2 * 0.25), atol=1e-12)


def test_envelope_mass_is_conserved(params):
    slow = Grid1D(256, 32.0)
    env = Envelope.gaussian(slow, 1.0, 1.0)
    out = evolve_envelope(env, 0.5, params, dT_max=0.005)
    assert l2_norm(out.A) == pytest.approx(l2_norm(env.A), rel=1e-10)
    back = evolve_envelope(out, 0.0, params, dT_max=0.005)
    assert np.max(np.abs(back.A.samples - env.A.samples)) < 1e-9


def test_nls_rhs_of_plane_wave(params):
    slow = Grid1D(32, 10.0)
    env = Envelope(slow, Envelope.gaussian(slow).A * 0.0 + 2.0)
    assert np.allclose(nls_rhs(env, params), 1j * params.nu2 * 8.0)


def test_envelope_file(tmp_path):
    path = tmp_path / "profile.txt"
    path.write_text("# X A\n-2 0\n0 1+0.5j   # peak\n\n2 0\n", encoding="utf-8")
    X, A = load_envelope_file(path)
    assert list(X) == [-2.0, 0.0, 2.0]
    assert A[1] == 1 + 0.5j
    slow = Grid1D(64, 16.0)
    env = Envelope.from_profile(slow, X, A)
    center = slow.num_points // 2
    assert env.A.samples[center] == pytest.approx(1 + 0.5j)
    assert env.A.samples[0] == 0.0
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2 3\n", encoding="utf-8")
    with pytest.raises(InvalidSamplesError):
        load_envelope_file(bad)


def test_ansatz_structure(params, packet_at):
    eps = 0.1
    bundle = packet_at(eps, AnsatzOrder.CORRECTED2, params)
    assert np.array_equal(bundle.packets[-1].coefficients, bundle.packets[1].conj_reflect().coefficients)
    assert np.array_equal(bundle.packets[-2].coefficients, bundle.packets[2].conj_reflect().coefficients)
    assert bundle.psi_c.real and bundle.psi_s.real
    assert np.allclose(bundle.eps_psi.samples, eps * bundle.psi_c.samples + eps ** 2 * bundle.psi_s.samples)
    assert l2_norm(bundle.psi_s) > 0.0
    basic = packet_at(eps, AnsatzOrder.BASIC, params)
    assert l2_norm(basic.psi_s) == 0.0
    assert np.allclose(basic.psi_c.samples, bundle.psi_c.samples)
    uncut = nls_profile(basic.envelope, 0.0, eps, params, basic.grid)
    assert np.allclose(uncut.samples, basic.eps_psi.samples)


def test_leading_packet_matches_the_carrier(params, packet_at):
    eps = 0.1
    bundle = packet_at(eps, AnsatzOrder.BASIC, params)
    grid = bundle.grid
    X = eps * grid.x - 0.5 * eps * grid.length
    expected = 2.0 * np.exp(-X ** 2) * np.cos(params.k0 * grid.x)
    assert np.max(np.abs(bundle.psi_c.samples - expected)) < 1e-10


def test_cutoff_bookkeeping(params, cut_bundle, packet_at):
    check_packet_support(cut_bundle.psi_c, params)
    assert cut_bundle.truncated_fraction < 1e-8
    narrow = packet_at(0.1, AnsatzOrder.BASIC, params)
    assert narrow.truncated_fraction > 0.5


def test_assemble_checks_time_and_grid(params):
    eps = 0.1
    grid = carrier_grid(eps, params.k0)
    env = Envelope.gaussian(slow_grid_for(grid, eps))
    with pytest.raises(ParameterRangeError):
        assemble_psi(env, 5.0, eps, params, AnsatzOrder.BASIC, grid)
    wrong = Envelope.gaussian(Grid1D(256, 10.0))
    with pytest.raises(GridMismatchError):
        assemble_psi(wrong, 0.0, eps, params, AnsatzOrder.BASIC, grid)


def test_time_derivative_matches_finite_difference(params):
    eps, h = 0.1, 1e-4
    grid = carrier_grid(eps, params.k0)
    env0 = Envelope.gaussian(slow_grid_for(grid, eps))

    def at(t):
        env = evolve_envelope(env0, eps ** 2 * t, params, dT_max=1e-4)
        return assemble_psi(env, t, eps, params, AnsatzOrder.CORRECTED2, grid, cutoff=False)

    exact = psi_time_derivative(at(0.0)).samples
    fd = (at(h).psi.samples - at(-h).psi.samples) / (2.0 * h)
    assert np.max(np.abs(fd - exact)) < 1e-6 * np.max(np.abs(exact))


def test_corrected_residual_is_smaller(params, packet_at):
    eps = 0.05
    basic = l2_norm(residual(packet_at(eps, AnsatzOrder.BASIC, params)))
    corrected = l2_norm(residual(packet_at(eps, AnsatzOrder.CORRECTED2, params)))
    assert corrected < 0.5 * basic


def test_residual_scaling_at_t0(params, packet_at):
    rows_basic, rows_corrected = [], []
    for eps in (0.2, 0.1, 0.05):
        rows_basic.append((eps, l2_norm(residual(packet_at(eps, AnsatzOrder.BASIC, params)))))
        rows_corrected.append((eps, l2_norm(residual(packet_at(eps, AnsatzOrder.CORRECTED2, params)))))
    basic = fit_slope(rows_basic).slope
    corrected = fit_slope(rows_corrected).slope
    assert 1.2 < basic < 1.8
    assert corrected >= 2.2
    assert corrected - basic >= 0.7
