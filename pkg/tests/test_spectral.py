import numpy as np
import pytest

from app.core.errors import DegenerateNormError, GridMismatchError, InvalidSamplesError, LabError, ParameterRangeError
from app.core.spectral import (
    Field,
    Grid1D,
    Spectrum,
    dealiased_product,
    derivative,
    forward_transform,
    integrate,
    inverse_transform,
    l2_norm,
    packet_center,
    random_field,
    reflect,
    seam_ratio,
    sobolev_norm,
)


def test_grid_requires_power_of_two():
    with pytest.raises(ParameterRangeError):
        Grid1D(48, 1.0)
    with pytest.raises(ParameterRangeError):
        Grid1D(64, -1.0)


def test_grid_layout(unit_grid):
    assert unit_grid.spacing == pytest.approx(2.0 * np.pi / 64)
    assert unit_grid.dealias_cutoff == 21
    assert unit_grid.mode_numbers[1] == 1 and unit_grid.mode_numbers[-1] == -1
    assert unit_grid.wavenumbers[5] == pytest.approx(5.0)
    assert np.count_nonzero(unit_grid.dealias_mask) == 43


def test_constant_has_its_value_at_k0(unit_grid):
    c = forward_transform(Field(unit_grid, np.full(64, 2.5))).coefficients
    assert c[0] == pytest.approx(2.5)
    assert np.max(np.abs(c[1:])) < 1e-14


def test_inverse_recovers_samples(unit_grid, rng):
    f = random_field(unit_grid, rng, 12)
    back = inverse_transform(forward_transform(f))
    assert back.real
    assert np.max(np.abs(back.samples - f.samples)) < 1e-13


def test_complex_spectrum_gives_complex_field(unit_grid):
    coeffs = np.zeros(64, dtype=complex)
    coeffs[3] = 1.0
    f = inverse_transform(Spectrum(unit_grid, coeffs))
    assert not f.real
    assert np.allclose(f.samples, np.exp(3j * unit_grid.x), atol=1e-14)


def test_derivative_of_sine(unit_grid):
    f = Field.from_function(unit_grid, lambda x: np.sin(3 * x))
    assert np.allclose(derivative(f, 1).samples, 3 * np.cos(3 * unit_grid.x), atol=1e-12)
    assert np.allclose(derivative(f, 2).samples, -9 * np.sin(3 * unit_grid.x), atol=1e-11)
    with pytest.raises(ParameterRangeError):
        derivative(f, -1)


def test_sobolev_norm_of_cosine(unit_grid):
    f = Field.from_function(unit_grid, lambda x: np.cos(4 * x))
    assert l2_norm(f) == pytest.approx(np.sqrt(np.pi), rel=1e-13)
    assert sobolev_norm(f, 0) == pytest.approx(l2_norm(f), rel=1e-13)
    assert sobolev_norm(f, 3) == pytest.approx(np.sqrt(np.pi * 17.0 ** 3), rel=1e-12)


def test_dealiased_product_is_exact_inside_the_band(unit_grid):
    f = Field.from_function(unit_grid, lambda x: np.cos(5 * x))
    g = Field.from_function(unit_grid, lambda x: np.sin(7 * x))
    expected = 0.5 * (np.sin(12 * unit_grid.x) + np.sin(2 * unit_grid.x))
    fg = dealiased_product(f, g)
    assert np.allclose(fg.samples, expected, atol=1e-14)
    assert np.allclose(dealiased_product(g, f).samples, fg.samples, atol=1e-15)


def test_dealiased_product_drops_modes_above_cutoff(unit_grid):
    f = Field.from_function(unit_grid, lambda x: np.sin(15 * x))
    # sin^2 = (1 - cos 30x)/2 and 30 > 21
    assert np.allclose(dealiased_product(f, f).samples, 0.5, atol=1e-14)


def test_real_field_rejects_imaginary_residue(unit_grid):
    with pytest.raises(InvalidSamplesError):
        Field(unit_grid, np.exp(1j * unit_grid.x), real=True)
    with pytest.raises(GridMismatchError):
        Field(unit_grid, np.zeros(32))


def test_mixed_grids_are_rejected(unit_grid):
    other = Grid1D(64, 4.0 * np.pi)
    with pytest.raises(GridMismatchError):
        Field.zeros(unit_grid) + Field.zeros(other)
    with pytest.raises(GridMismatchError):
        dealiased_product(Field.zeros(unit_grid), Field.zeros(other))


def test_odd_symbol_vanishes_at_nyquist(unit_grid):
    values = unit_grid.sample_symbol(lambda k: 1j * k)
    assert values[unit_grid.nyquist_index] == 0.0
    even = unit_grid.sample_symbol(lambda k: k ** 2)
    assert even[unit_grid.nyquist_index] == pytest.approx(32.0 ** 2)


def test_off_grid_wavenumber_is_rejected(unit_grid):
    assert unit_grid.index_of_wavenumber(3.0) == 3
    assert unit_grid.index_of_wavenumber(-3.0) == 61
    with pytest.raises(GridMismatchError):
        unit_grid.index_of_wavenumber(2.5)


def test_reflection(unit_grid):
    f = Field.from_function(unit_grid, lambda x: np.sin(x) + np.cos(2 * x))
    mirrored = reflect(f)
    assert np.allclose(mirrored.samples, -np.sin(unit_grid.x) + np.cos(2 * unit_grid.x), atol=1e-14)


def test_integrate_and_mean(unit_grid):
    f = Field.from_function(unit_grid, lambda x: 1.0 + np.cos(x))
    assert integrate(f) == pytest.approx(2.0 * np.pi, rel=1e-14)


def test_packet_center_and_seam():
    grid = Grid1D(256, 100.0)
    f = Field.from_function(grid, lambda x: np.exp(-((x - 30.0) / 3.0) ** 2))
    assert packet_center(f) == pytest.approx(30.0, abs=1e-6)
    assert seam_ratio(f, 30.0) < 1e-30
    wide = Field.from_function(grid, lambda x: np.exp(-((x - 30.0) / 40.0) ** 2))
    assert seam_ratio(wide, 30.0) > 0.01
    with pytest.raises(DegenerateNormError):
        packet_center(Field.zeros(grid))


def test_field_errors_belong_to_the_lab_hierarchy(unit_grid):
    with pytest.raises(LabError):
        Field(unit_grid, 1j * np.ones(unit_grid.num_points))


def test_random_field_is_real_and_band_limited(unit_grid, rng):
    f = random_field(unit_grid, rng, 6)
    c = forward_transform(f).coefficients
    assert f.real
    assert abs(c[0]) < 1e-14
    assert np.max(np.abs(c[np.abs(unit_grid.mode_numbers) > 6])) < 1e-14
    with pytest.raises(ParameterRangeError):
        random_field(unit_grid, rng, 32)
