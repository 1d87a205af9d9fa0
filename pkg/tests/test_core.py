import math

import numpy as np
import pytest

from dirac_numerov import (
    Ansatz,
    KSign,
    PhysicalConfig,
    RadialGrid,
    dimensionless_state,
    k_value,
    reconstruct_fg,
    rho_of_r,
)
from dirac_numerov.errors import EtaOutOfRange, LengthMismatch


def test_k_value_branches():
    assert k_value(PhysicalConfig(dimension=3, ell=0, k_sign=KSign.PLUS)) == 1.0
    assert k_value(PhysicalConfig(dimension=3, ell=0, k_sign=KSign.MINUS)) == -1.0
    assert k_value(PhysicalConfig(dimension=9, ell=0, k_sign=KSign.PLUS)) == 4.0
    assert k_value(PhysicalConfig(dimension=4, ell=2)) == 3.5


@pytest.mark.parametrize("bad", [dict(dimension=1), dict(dimension=3, ell=-1),
                                 dict(dimension=3, mass=0.0), dict(dimension=3, mass=-2.0)])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        PhysicalConfig(**bad)


def test_state_at_zero_energy_d3():
    config = PhysicalConfig(dimension=3, ansatz=Ansatz.GENERALIZED)
    state = dimensionless_state(config, 0.0)
    assert state.tau == 0.0
    assert state.lambda_ == 1.0
    assert state.tau_prime == state.xi
    assert state.a_const == state.xi


def test_state_d5_against_closed_formulas():
    # direct evaluation of the tau/tau' definitions at D=5, M=1, xi=1, eta=0.6;
    # expected values recomputed with 40-digit arithmetic agree with the
    # decimals below to ~1e-39
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 40
    config = PhysicalConfig(dimension=5, ansatz=Ansatz.GENERALIZED)
    state = dimensionless_state(config, 0.6, xi=1.0)
    assert math.isclose(state.lambda_, 0.64, rel_tol=1e-15)
    assert math.isclose(state.a_const, 4.0, rel_tol=1e-15)
    assert math.isclose(state.tau_prime, 3.2, rel_tol=1e-15)
    assert math.isclose(state.tau, 1.92, rel_tol=1e-15)
    eta, d = mpmath.mpf("0.6"), 5
    lam_sqrt = mpmath.sqrt(1 - eta * eta)
    tau_oracle = 2 ** (d - 3) * 1 * eta / lam_sqrt ** (4 - d)
    assert math.isclose(state.tau, float(tau_oracle), rel_tol=1e-15)


def test_state_ratio_identity_random():
    rng = np.random.default_rng(11)
    for _ in range(500):
        d = int(rng.integers(3, 11))
        eta = float(rng.uniform(-0.999999, 0.999999))
        config = PhysicalConfig(dimension=d, ansatz=Ansatz.GENERALIZED)
        state = dimensionless_state(config, eta)
        # tau/tau' = eta to a few ulps
        assert abs(state.tau / state.tau_prime - eta) <= 4 * math.ulp(max(abs(eta), 1e-30))


def test_state_square_difference_identity_random():
    # tau'^2 - tau^2 = A^2 lam^(D-3), evaluated in the cancellation-free
    # grouping tau'^2 (1 - eta^2) (the literal float difference loses digits
    # as eta -> 1, which is a property of subtraction, not of the state)
    rng = np.random.default_rng(12)
    for _ in range(500):
        d = int(rng.integers(3, 11))
        eta = float(rng.uniform(-0.999999, 0.999999))
        config = PhysicalConfig(dimension=d, ansatz=Ansatz.GENERALIZED)
        state = dimensionless_state(config, eta)
        lhs = state.tau_prime * state.tau_prime * state.lambda_
        rhs = state.a_const * state.a_const * state.lambda_ ** (d - 3)
        assert abs(lhs - rhs) <= 1e-12 * abs(rhs)


def test_state_recompute_is_deterministic():
    config = PhysicalConfig(dimension=7, ansatz=Ansatz.GENERALIZED)
    a = dimensionless_state(config, 0.87)
    b = dimensionless_state(config, 0.87)
    assert (a.tau, a.tau_prime, a.lambda_, a.a_const) == (b.tau, b.tau_prime, b.lambda_, b.a_const)


def test_state_rejects_eta_out_of_range():
    config = PhysicalConfig(dimension=3)
    for eta in (1.0, -1.0, 1.5):
        with pytest.raises(EtaOutOfRange):
            dimensionless_state(config, eta)


def test_rho_of_r_values():
    assert math.isclose(rho_of_r(1.0, 1.0, 0.0), 2.0, rel_tol=1e-15)
    assert math.isclose(rho_of_r(0.5, 2.0, 0.0), 2.0, rel_tol=1e-15)
    assert math.isclose(rho_of_r(1.0, 1.0, 0.8), 1.2, rel_tol=1e-14)
    with pytest.raises(EtaOutOfRange):
        rho_of_r(1.0, 1.0, 1.0)


def test_rho_of_r_monotone_in_r():
    r = np.linspace(0.1, 30.0, 200)
    rho = [rho_of_r(float(x), 1.0, 0.3) for x in r]
    assert np.all(np.diff(rho) > 0.0)


def test_reconstruct_fg_trivial_cases():
    phi = np.array([0.3, -1.2, 2.0])
    f, g = reconstruct_fg(phi, phi, 1.0, 0.0)
    assert np.allclose(f, 0.0) and np.allclose(g, 2.0 * phi)
    f, g = reconstruct_fg(phi, np.zeros(3), 1.0, 0.0)
    assert np.allclose(f, phi) and np.allclose(g, phi)
    f, g = reconstruct_fg([1.0], [-1.0], 5.0, 3.0)
    assert math.isclose(f[0], 2.0 * math.sqrt(8.0), rel_tol=1e-15)
    assert g[0] == 0.0


def test_reconstruct_fg_roundtrip():
    rng = np.random.default_rng(3)
    plus = rng.normal(size=50)
    minus = rng.normal(size=50)
    mass, energy = 1.0, 0.73
    f, g = reconstruct_fg(plus, minus, mass, energy)
    # invert the 2x2 map
    plus_back = 0.5 * (g / math.sqrt(mass - energy) + f / math.sqrt(mass + energy))
    minus_back = 0.5 * (g / math.sqrt(mass - energy) - f / math.sqrt(mass + energy))
    assert np.max(np.abs(plus_back - plus)) < 1e-13
    assert np.max(np.abs(minus_back - minus)) < 1e-13


def test_reconstruct_fg_errors():
    with pytest.raises(LengthMismatch):
        reconstruct_fg([1.0, 2.0], [1.0], 1.0, 0.0)
    with pytest.raises(EtaOutOfRange):
        reconstruct_fg([1.0], [1.0], 1.0, 1.0)


def test_radial_grid_nodes_and_step():
    grid = RadialGrid(rho_min=1e-6, rho_max=10.0, n_points=10001)
    nodes = grid.nodes()
    assert nodes[0] == grid.rho_min and nodes[-1] == grid.rho_max
    steps = np.diff(nodes)
    assert math.isclose(grid.step, (10.0 - 1e-6) / 10000, rel_tol=1e-15)
    assert np.allclose(steps, grid.step, rtol=1e-12)


@pytest.mark.parametrize("bad", [dict(rho_min=0.0, rho_max=1.0, n_points=32),
                                 dict(rho_min=1.0, rho_max=0.5, n_points=32),
                                 dict(rho_min=0.1, rho_max=1.0, n_points=8)])
def test_radial_grid_validation(bad):
    with pytest.raises(ValueError):
        RadialGrid(**bad)
