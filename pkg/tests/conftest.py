import numpy as np
import pytest

from app.core.carrier import CarrierParams
from app.core.nls import AnsatzOrder, Envelope, assemble_psi, carrier_grid, slow_grid_for
from app.core.spectral import Grid1D


@pytest.fixture
def params():
    return CarrierParams.from_k0(1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def unit_grid():
    """64 points on [0, 2 pi): integer wavenumbers, dealiasing cutoff 21."""
    return Grid1D(64, 2.0 * np.pi)


@pytest.fixture
def packet_grid(params):
    """k0 on the grid with mode spacing k0/256; the carrier band holds 23 modes."""
    return Grid1D(2048, 2.0 * np.pi * 256 / params.k0)


@pytest.fixture
def cut_bundle(params, packet_grid):
    """Cut eps = 0.1 packet, wide in X so the cut barely touches it."""
    eps = 0.1
    slow = slow_grid_for(packet_grid, eps, 256)
    env = Envelope.gaussian(slow, 1.0, 8.0 * eps / params.delta)
    return assemble_psi(env, 0.0, eps, params, AnsatzOrder.BASIC, packet_grid, cutoff=True)


@pytest.fixture
def packet_at():
    """Uncut gaussian packet on the default carrier grid for a given eps and order."""

    def build(eps, order, params, t=0.0):
        grid = carrier_grid(eps, params.k0)
        env = Envelope.gaussian(slow_grid_for(grid, eps), 1.0, 1.0, T=eps ** 2 * t)
        return assemble_psi(env, t, eps, params, order, grid, cutoff=False)

    return build
