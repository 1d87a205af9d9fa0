import math

import numpy as np
import pytest

from dirac_numerov import (
    Ansatz,
    PhysicalConfig,
    RadialGrid,
    coefficient_set_ansatz1,
    dimensionless_state,
)
from dirac_numerov.analytic import analytic_energy
from dirac_numerov.coefficients import CoefficientSet
from dirac_numerov.errors import SingularCoefficient
from dirac_numerov.numerov import (
    Direction,
    Scheme,
    canonical_step,
    generalized_step,
    measured_order,
    propagate,
    scheme_report,
)


def make_set(p=None, p_prime=None, w=None, weight=None, factor=None, **kw):
    """Synthetic coefficient bundle for controlled integrator tests."""
    zero = lambda rho: np.zeros_like(np.asarray(rho, dtype=float)) + 0.0
    one = lambda rho: np.ones_like(np.asarray(rho, dtype=float))
    fields = dict(
        p_fn=p or zero,
        q_fn=one,
        v_fn=zero,
        s_fn=zero,
        w_fn=w or zero,
        p_prime_fn=p_prime or zero,
        weight_fn=weight or w or zero,
        integrating_factor_fn=factor or one,
        match_level=0.0,
        turning_scale=1.0,
        indicial_exponent=None,
        singular_power=1,
        dimension=3,
        branch="plus",
        k_value=1.0,
        a_const=1.0,
        c_const=0.0,
        lambda_d3=1.0,
        xi=0.001,
        eta=0.5,
    )
    fields.update(kw)
    return CoefficientSet(**fields)


def d3_ground_coeffs():
    config = PhysicalConfig(dimension=3, ell=0, ansatz=Ansatz.ONE_OVER_R)
    eta = analytic_energy(config).energy_ratio
    state = dimensionless_state(config, eta)
    return coefficient_set_ansatz1(state, config), state


# ---------------------------------------------------------------------------
# scalar steps


def test_generalized_step_free_equation_is_exact():
    coeffs = make_set()
    # phi'' = 0: linear functions advance exactly
    for a, b in ((0.0, 1.0), (2.0, 1.5), (-1.0, 3.0)):
        nxt = generalized_step(a, b, rho=1.0, delta=0.25, coeffs=coeffs)
        assert math.isclose(nxt, 2.0 * b - a, rel_tol=1e-15)


def test_generalized_step_exponential_fourth_order():
    # w = -k^2 (p = 0) has solution e^(-k rho); global error contracts ~16x per halving
    k = 0.7

    def run(h):
        n = int(round(4.0 / h)) + 1
        rho = np.linspace(1.0, 5.0, n)
        coeffs = make_set(w=lambda r: np.full_like(np.asarray(r, float), -k * k))
        exact = np.exp(-k * rho)
        y_prev, y_curr = exact[0], exact[1]
        for i in range(1, n - 1):
            y_prev, y_curr = y_curr, generalized_step(y_prev, y_curr, float(rho[i]), h, coeffs)
        return abs(y_curr - exact[-1])

    e1, e2 = run(0.02), run(0.01)
    assert 12.0 < e1 / e2 < 20.0


def test_generalized_step_d3_ground_state_smooth_region():
    # seeding the closed-form phi_+ at rho = 1 must track it to rho = 5
    # within 1e-8 at delta = 1e-3 (second-order transport, small error constant)
    coeffs, state = d3_ground_coeffs()
    gamma = coeffs.indicial_exponent
    h = 1e-3
    n = int(round(5.0 / h)) + 1
    rho = np.linspace(1.0, 6.0, n)
    exact = rho**gamma * np.exp(-rho / 2.0)
    y_prev, y_curr = float(exact[0]), float(exact[1])
    values = [y_prev, y_curr]
    from dirac_numerov.numerov import _general_sweep_lr, _generalized_arrays

    p0, p1, p2 = _generalized_arrays(
        coeffs.p_fn(rho), coeffs.p_prime_fn(rho), coeffs.w_fn(rho), h
    )
    buf = [0.0] * n
    buf[0], buf[1] = y_prev, y_curr
    _general_sweep_lr(p0.tolist(), p1.tolist(), p2.tolist(), buf, 1, n - 1)
    i5 = int(round(4.0 / h))
    assert abs(buf[i5] - exact[i5]) / exact[i5] < 1e-8


def test_canonical_step_straight_line_and_cosh():
    nxt = canonical_step(0.0, 1.0, rho=1.0, delta=0.5, weight=lambda r: 0.0)
    assert math.isclose(nxt, 2.0, rel_tol=1e-15)

    def run(h):
        n = int(round(2.0 / h)) + 1
        x = np.linspace(0.0, 2.0, n)
        exact = np.cosh(x)
        y_prev, y_curr = float(exact[0]), float(exact[1])
        for i in range(1, n - 1):
            y_prev, y_curr = y_curr, canonical_step(y_prev, y_curr, float(x[i]), h, lambda r: -1.0)
        return abs(y_curr - exact[-1])

    e1, e2 = run(0.02), run(0.01)
    assert 12.0 < e1 / e2 < 20.0


def test_canonical_step_singular_coefficient():
    h = 0.1
    with pytest.raises(SingularCoefficient):
        canonical_step(1.0, 1.0, rho=0.5, delta=h, weight=lambda r: -12.0 / (h * h))


def test_schemes_agree_on_d3_ground_state():
    # both schemes transported from identical smooth-region seeds agree on
    # phi to 1e-7 (the canonical path is the reference)
    coeffs, state = d3_ground_coeffs()
    gamma = coeffs.indicial_exponent
    a, b = 1.0, 6.0
    n = 5001
    grid = RadialGrid(rho_min=a, rho_max=b, n_points=n)
    rho = grid.nodes()
    exact = rho**gamma * np.exp(-rho / 2.0)
    seeds = (float(exact[0]), float(exact[1]))
    gen = propagate(grid, coeffs, Direction.LEFT_TO_RIGHT, seeds, Scheme.GENERALIZED)
    can = propagate(grid, coeffs, Direction.LEFT_TO_RIGHT, seeds, Scheme.CANONICAL)
    rel = np.max(np.abs(gen.values - can.values) / np.abs(exact))
    assert rel < 1e-7
    assert np.max(np.abs(can.values - exact) / exact) < 2e-9


# ---------------------------------------------------------------------------
# grid propagation


def test_propagate_power_law_branch_small_rho():
    # from seeds (0, delta^gamma) the left sweep must follow the regular
    # power-law branch; the bound applies where the solution's sub-leading
    # factor exp(-rho/2) deviates from 1 by less than the 1% tolerance
    coeffs, state = d3_ground_coeffs()
    gamma = coeffs.indicial_exponent
    grid = RadialGrid(rho_min=1e-6, rho_max=2.0, n_points=20001)
    h = grid.step
    res = propagate(grid, coeffs, Direction.LEFT_TO_RIGHT, (0.0, h**gamma), Scheme.CANONICAL)
    rho = grid.nodes()
    window = slice(10, 170)  # rho in [1e-3, 1.7e-2]
    scale = res.values[10] / rho[10] ** gamma
    rel = np.abs(res.values[window] / (scale * rho[window] ** gamma) - 1.0)
    assert np.max(rel) < 0.01


def test_propagate_inward_decay():
    coeffs, _ = d3_ground_coeffs()
    grid = RadialGrid(rho_min=1e-6, rho_max=40.0, n_points=40001)
    h = grid.step
    seeds = (math.exp(-40.0 / 2.0), math.exp(-(40.0 - h) / 2.0))
    res = propagate(grid, coeffs, Direction.RIGHT_TO_LEFT, seeds, Scheme.CANONICAL,
                    stop_index=20000)
    vals = res.values[20000:]
    assert np.all(np.diff(vals) < 0.0)  # monotone decay toward the boundary


def test_direction_consistency_at_converged_eigenvalue(solve_cached):
    # left sweep from the power-law seeds and right sweep from the decaying
    # seeds describe the same ray at the eigenvalue: after matching scales at
    # one node, they agree across the classically allowed region
    from dirac_numerov import Ansatz, PhysicalConfig, dimensionless_state

    result = solve_cached(3, Ansatz.ONE_OVER_R)
    config = PhysicalConfig(dimension=3, ell=0, ansatz=Ansatz.ONE_OVER_R)
    state = dimensionless_state(config, result.eta_star)
    coeffs = coefficient_set_ansatz1(state, config)
    grid = RadialGrid(rho_min=1e-6, rho_max=50.0, n_points=50001)
    h = grid.step
    gamma = coeffs.indicial_exponent
    left = propagate(grid, coeffs, Direction.LEFT_TO_RIGHT, (0.0, h**gamma),
                     Scheme.CANONICAL, stop_index=12000)
    b = grid.rho_max
    right = propagate(grid, coeffs, Direction.RIGHT_TO_LEFT,
                      (math.exp(-b / 2.0), math.exp(-(b - h) / 2.0)),
                      Scheme.CANONICAL, stop_index=2000)
    overlap = slice(2000, 12000)  # rho in [2, 12]
    ratio = left.values[overlap] / right.values[overlap]
    ratio /= ratio[len(ratio) // 2]
    assert np.max(np.abs(ratio - 1.0)) < 1e-6


def test_propagate_linearity():
    coeffs, _ = d3_ground_coeffs()
    grid = RadialGrid(rho_min=0.5, rho_max=5.0, n_points=451)
    base = propagate(grid, coeffs, Direction.LEFT_TO_RIGHT, (1.0, 1.1), Scheme.GENERALIZED)
    # power-of-two scaling commutes exactly with the float recurrence
    scaled = propagate(grid, coeffs, Direction.LEFT_TO_RIGHT, (0.25, 0.275), Scheme.GENERALIZED)
    assert np.array_equal(scaled.values, 0.25 * base.values)
    general = propagate(grid, coeffs, Direction.LEFT_TO_RIGHT, (1.7, 1.87), Scheme.GENERALIZED)
    rel = np.abs(general.values - 1.7 * base.values) / np.abs(base.values)
    assert np.max(rel) < 1e-11  # general factors accumulate rounding only


def test_propagate_rescaling_keeps_log_derivative():
    # strongly growing solution triggers the 1e100 renormalization
    grow = make_set(weight=lambda r: np.full_like(np.asarray(r, float), -36.0))
    grid = RadialGrid(rho_min=0.1, rho_max=80.0, n_points=8001)
    res = propagate(grid, grow, Direction.LEFT_TO_RIGHT, (1e-3, 1.1e-3), Scheme.CANONICAL)
    assert res.overflowed and res.rescale_count >= 1
    assert np.all(np.isfinite(res.values))
    # e^(6 rho): the centered 3-point estimator gives sinh(6h)/h up to the
    # recurrence's own O(h^4) mode shift, unchanged by rescaling bookkeeping
    h = grid.step
    assert math.isclose(res.log_derivative_at(6000), math.sinh(6.0 * h) / h, rel_tol=1e-7)


def test_log_derivative_scale_invariance():
    coeffs, _ = d3_ground_coeffs()
    grid = RadialGrid(rho_min=0.5, rho_max=5.0, n_points=451)
    res = propagate(grid, coeffs, Direction.LEFT_TO_RIGHT, (1.0, 1.05), Scheme.CANONICAL)
    before = res.log_derivative_at(200)
    res.values *= 2.0**520
    after = res.log_derivative_at(200)
    assert math.isclose(before, after, rel_tol=1e-12)


def test_propagate_equals_repeated_steps():
    coeffs, _ = d3_ground_coeffs()
    grid = RadialGrid(rho_min=1.0, rho_max=1.15, n_points=16)
    h = grid.step
    res = propagate(grid, coeffs, Direction.LEFT_TO_RIGHT, (1.0, 0.995), Scheme.GENERALIZED)
    y_prev, y_curr = 1.0, 0.995
    rho = grid.nodes()
    for i in range(1, 15):
        y_prev, y_curr = y_curr, generalized_step(y_prev, y_curr, float(rho[i]), h, coeffs)
        assert math.isclose(res.values[i + 1], y_curr, rel_tol=1e-12)


# ---------------------------------------------------------------------------
# convergence order and the scheme report


def test_fourth_order_signature_canonical():
    # chi'' + (1 - x^2) chi = 0, chi = exp(-x^2/2): three halvings, each
    # contracting the max-norm error by 12..20
    def run(h):
        n = int(round(2.0 / h)) + 1
        x = np.linspace(0.0, 2.0, n)
        exact = np.exp(-x * x / 2.0)
        from dirac_numerov.numerov import _canonical_factors, _numerov_sweep_lr

        f = _canonical_factors(1.0 - x * x, h).tolist()
        buf = [0.0] * n
        buf[0], buf[1] = float(exact[0]), float(exact[1])
        _numerov_sweep_lr(f, buf, 1, n - 1)
        return float(np.max(np.abs(np.asarray(buf) - exact)))

    errors = [run(h) for h in (0.08, 0.04, 0.02, 0.01)]
    ratios = [errors[i] / errors[i + 1] for i in range(3)]
    assert all(12.0 < r < 20.0 for r in ratios), ratios
    assert 3.5 < measured_order(errors) < 4.5


def test_scheme_report_contents():
    report = scheme_report()
    assert 3.5 < report["orders"]["canonical"] < 4.5
    # the printed generalized coefficients drop to second order when p != 0
    assert 1.5 < report["orders"]["generalized"] < 2.5
    # the sign-flipped variant is not even consistent
    assert report["orders"]["generalized_flipped"] < 1.0
    assert report["agreement"] < 1e-7
    assert "diagnostic" in report["text"]
