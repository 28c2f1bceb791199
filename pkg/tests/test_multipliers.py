import mpmath
import numpy as np
import pytest

from app.core import multipliers
from app.core.carrier import CarrierParams
from app.core.errors import GridMismatchError, InvalidSamplesError, ParameterRangeError, ResonanceError
from app.core.spectral import Field, Grid1D, random_field


def test_k0_symbol_and_action(unit_grid):
    K = multipliers.k0(unit_grid)
    k = unit_grid.wavenumbers
    inner = np.arange(64) != unit_grid.nyquist_index
    assert np.allclose(K.symbol_values[inner], -1j * np.tanh(k[inner]), atol=1e-15)
    assert K.symbol_values[unit_grid.nyquist_index] == 0.0
    # K0 cos(x) = tanh(1) sin(x)
    out = K(Field.from_function(unit_grid, np.cos))
    assert out.real
    assert np.allclose(out.samples, np.tanh(1.0) * np.sin(unit_grid.x), atol=1e-14)


def test_hilbert_symbol(unit_grid):
    H = multipliers.k0(unit_grid, hilbert=True)
    out = H(Field.from_function(unit_grid, lambda x: np.cos(3 * x)))
    assert np.allclose(out.samples, np.sin(3 * unit_grid.x), atol=1e-14)


def test_k0_inv_dx_removable_point_and_bound():
    grid = Grid1D(4096, 2.0 * np.pi * 64)
    kid = multipliers.k0_inv_dx(grid)
    assert kid.symbol_values[0] == -1.0
    assert 0.0 in kid.removable_singularities
    ratio = np.abs(kid.symbol_values) / np.sqrt(1.0 + grid.wavenumbers ** 2)
    assert np.max(ratio) <= 1.0 + 1e-14


def test_k0_inv_dx_inverts_k0_on_derivatives(unit_grid):
    composed = multipliers.k0_inv_dx(unit_grid) @ multipliers.k0(unit_grid)
    assert np.allclose(composed.symbol_values, unit_grid.sample_symbol(lambda k: 1j * k), atol=1e-12)


def test_theta_symbol_shape():
    eps, delta = 0.1, 0.05
    values = multipliers.theta_symbol(np.array([0.0, 0.025, 0.05, -0.05, 0.2]), eps, delta)
    assert values == pytest.approx([0.1, 0.55, 1.0, 1.0, 1.0])


def test_theta_rejects_bad_parameters(unit_grid):
    with pytest.raises(ParameterRangeError):
        multipliers.weight_theta(unit_grid, 1.5, 0.1)
    with pytest.raises(ParameterRangeError):
        multipliers.weight_theta_inv(unit_grid, 0.1, 0.0)


def test_projections_are_complementary(packet_grid):
    low, high = multipliers.projections(packet_grid, 0.05)
    assert np.all((low.symbol_values + high.symbol_values) == 1.0)
    assert (low @ high).sup() == 0.0


def test_packet_inverse_lives_on_the_carrier_bands(packet_grid, params):
    inv = multipliers.k0_inv_packet(packet_grid, params.k0, params.delta)
    k = packet_grid.wavenumbers
    band = np.abs(np.abs(k) - params.k0) <= params.delta
    assert np.all(inv.symbol_values[~band] == 0.0)
    assert np.allclose(inv.symbol_values[band], 1j / np.tanh(k[band]))


def test_tanh_identity_against_mpmath(rng):
    k = rng.uniform(-20.0, 20.0, 2000)
    m = rng.uniform(-20.0, 20.0, 2000)
    lhs, rhs = multipliers.verify_tanh_identity(k, m)
    assert np.max(np.abs(lhs - rhs)) < 1e-12
    for kk, mm in [(0.3, -1.7), (2.0, 1.0), (-5.5, 3.25)]:
        with mpmath.workdps(40):
            exact = mpmath.tanh(kk) - mpmath.tanh(mm) - mpmath.tanh(kk - mm)
        lhs, rhs = multipliers.verify_tanh_identity(kk, mm)
        assert lhs == pytest.approx(float(exact), abs=1e-14)
        assert rhs == pytest.approx(float(exact), abs=1e-14)


def test_operator_identity_on_band_limited_fields(unit_grid, rng):
    for _ in range(20):
        f, g = random_field(unit_grid, rng, 10), random_field(unit_grid, rng, 10)
        assert multipliers.operator_identity_defect(f, g) < 1e-10


def test_skew_symmetry(unit_grid, rng):
    K = multipliers.k0(unit_grid)
    f = random_field(unit_grid, rng, 20)
    assert abs(unit_grid.spacing * np.sum(f.samples * K(f).samples)) < 1e-12


def test_real_preserving_is_enforced(unit_grid):
    with pytest.raises(InvalidSamplesError):
        multipliers.Multiplier("odd-real", unit_grid, unit_grid.wavenumbers)
    with pytest.raises(InvalidSamplesError):
        multipliers.Multiplier("pole", unit_grid, np.full(unit_grid.num_points, np.inf))
    odd = multipliers.Multiplier("odd-real", unit_grid, unit_grid.wavenumbers, real_preserving=False)
    out = odd(Field.from_function(unit_grid, np.cos))
    assert not out.real


def test_multiplier_grid_mismatch(unit_grid):
    K = multipliers.k0(unit_grid)
    with pytest.raises(GridMismatchError):
        K(Field.zeros(Grid1D(64, 1.0)))


def test_kernel_t_support_and_pair_symmetry(packet_grid, params):
    eps = 0.1
    plus = multipliers.kernel_t(packet_grid, 1, params, eps)
    minus = multipliers.kernel_t(packet_grid, -1, params, eps)
    assert not plus.real_preserving
    outside = np.abs(packet_grid.wavenumbers) > params.delta
    assert np.all(plus.symbol_values[outside] == 0.0)
    assert np.count_nonzero(plus.symbol_values) > 1
    # t_{-1}(-k) = t_1(k); a single kernel is not even
    reflected = minus.symbol_values[packet_grid.reflection_index]
    assert np.max(np.abs(reflected - plus.symbol_values)) <= 1e-12 * plus.sup()
    assert np.max(np.abs(plus.symbol_values[packet_grid.reflection_index] - plus.symbol_values)) > 1e-6
    with pytest.raises(ParameterRangeError):
        multipliers.kernel_t(packet_grid, 2, params, eps)


def test_kernel_t_value_at_zero(params):
    k0, eps, delta = params.k0, 0.1, params.delta
    # at k = 0: k/tanh k -> 1 and theta(0) = eps
    expected = -1.0 * (-k0) * multipliers.theta_symbol(-2 * k0, eps, delta) / (
        eps * np.tanh(k0) * np.tanh(-k0) * (0.0 - 2.0 * np.tanh(k0) - np.tanh(-2 * k0))
    )
    assert multipliers.t_symbol(0.0, 1, params, eps)[0] == pytest.approx(float(expected), rel=1e-14)


def test_nonresonance_margin(params):
    margin = multipliers.nonresonance_margin(params)
    assert margin > 0.4
    assert params.margin == pytest.approx(margin)
    with pytest.raises(ResonanceError) as info:
        multipliers.nonresonance_margin(params, tolerance=10.0)
    assert info.value.margin == pytest.approx(margin)


def test_nonresonance_margin_shrinks_for_long_carriers():
    assert CarrierParams.from_k0(0.2).margin < CarrierParams.from_k0(1.0).margin
