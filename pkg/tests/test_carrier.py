import math

import mpmath
import pytest

from app.core.carrier import CarrierParams, harmonic_detuning, nls_coefficients
from app.core.errors import ParameterRangeError


def _reference(k0):
    with mpmath.workdps(40):
        k = mpmath.mpf(k0)
        t = mpmath.tanh(k)
        nu1 = -t * mpmath.sech(k) ** 2
        nu2 = k * (k / (mpmath.tanh(2 * k) - 2 * t) + 1 / t ** 2)
        return float(nu1), float(nu2)


@pytest.mark.parametrize("k0", [0.5, 1.0, 2.0])
def test_nls_coefficients_against_mpmath(k0):
    nu1, nu2 = nls_coefficients(k0)
    ref1, ref2 = _reference(k0)
    assert nu1 == pytest.approx(ref1, rel=1e-13)
    assert nu2 == pytest.approx(ref2, rel=1e-12)


def test_unit_carrier_values(params):
    assert params.omega0 == pytest.approx(math.tanh(1.0))
    assert params.cg == pytest.approx(1.0 / math.cosh(1.0) ** 2, rel=1e-13)
    assert params.nu1 == pytest.approx(-0.31985, abs=1e-5)
    assert params.nu2 == pytest.approx(-0.06433, abs=1e-4)


def test_default_delta(params):
    assert params.delta == pytest.approx(0.045)
    assert CarrierParams.from_k0(2.0).delta == pytest.approx(0.09)


def test_delta_range_is_enforced():
    with pytest.raises(ParameterRangeError):
        CarrierParams(k0=1.0, delta=0.05)
    with pytest.raises(ParameterRangeError):
        CarrierParams(k0=1.0, delta=0.0)
    with pytest.raises(ParameterRangeError):
        CarrierParams.from_k0(-1.0)
    with pytest.raises(ParameterRangeError):
        nls_coefficients(0.0)


def test_harmonic_detuning():
    assert harmonic_detuning(1.0, 1) == 0.0
    assert harmonic_detuning(1.0, 2) == pytest.approx(math.tanh(2.0) - 2.0 * math.tanh(1.0))
    assert harmonic_detuning(1.0, 2) < 0.0


def test_as_dict(params):
    data = params.as_dict()
    assert set(data) == {"k0", "delta", "omega0", "cg", "nu1", "nu2", "nonresonance_margin"}
    assert data["nonresonance_margin"] == params.margin
