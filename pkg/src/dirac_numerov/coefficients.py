"""Coupling constant and coefficient functions of the second-order phi_+ equation.

The radial problem is propagated in the form

    phi'' + p(rho) phi' + w(rho) phi = 0,      w = q(rho) [tau - V(rho)],

where V is the effective potential whose crossing with the energy-side
constant tau locates the classical turning points. For the 1/r^(D-2)
potential the coefficient functions are (plus component, sigma = +1; the
minus component flips sigma):

    den(rho) = c rho^(D-3) + sigma A,        c = K lam^((4-D)/2)
    p(rho)   = (1/rho) (1 + sigma (D-3) A / den)
    q(rho)   = (1/rho^(D-2)) (1 + sigma (D-3) c rho^(D-4) / den)
    s(rho)   = rho^(D-2)/4 - sigma (rho^(D-3)/2)(1 + sigma (D-3) A / den)
               + (K^2 - A^2 lam^(D-3) / rho^(2(D-3))) rho^(D-4)
    V(rho)   = s(rho) / (rho^(D-2) q(rho))
    w(rho)   = q(rho) tau - s(rho) / rho^(D-2)

These are the exact single-equation rewrite of the coupled first-order
system; at D = 3 they collapse to p = q = 1/rho and
w = -1/4 + (tau + sigma/2)/rho - (K^2 - xi^2)/rho^2, the closed-form-solvable
three-dimensional equation. The energy enters w through tau = eta tau',
multiplying the highest inverse powers of rho when D > 3.

The 1/r potential keeps the three-dimensional structure in every D (only K
changes), so its coefficient set uses tau = xi E / sqrt(M^2 - E^2) regardless
of dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Ansatz, DimensionlessState, PhysicalConfig, k_value
from .errors import DenominatorVanishes, UnsupportedDimension

_BRANCHES = {"plus": 1.0, "minus": -1.0}


def coupling_xi(config: PhysicalConfig) -> float:
    """Coulomb coupling strength xi for the configured potential convention.

    The Gauss-law potential carries the solid-angle normalization

        xi = 2 Gamma(D/2) e^2 / (pi^((D-2)/2) (D-2)),

    with e^2 equal to the three-dimensional fine-structure constant (the
    electric charge is assumed not to run with dimensionality). The 1/r
    convention uses xi = alpha in every dimension. At D = 3 both give alpha.
    """
    from .core import FINE_STRUCTURE_CONSTANT

    d = config.dimension
    if config.ansatz is Ansatz.ONE_OVER_R:
        return FINE_STRUCTURE_CONSTANT
    if d <= 2:
        raise UnsupportedDimension(
            f"the 1/r^(D-2) potential needs D >= 3, got D = {d}"
        )
    return (
        2.0
        * math.gamma(d / 2.0)
        * FINE_STRUCTURE_CONSTANT
        / (math.pi ** ((d - 2) / 2.0) * (d - 2))
    )


def potential_energy(r: float, config: PhysicalConfig) -> float:
    """Potential energy U(r): -xi/r^(D-2) (Gauss-law) or -xi/r (1/r convention)."""
    if not r > 0.0:
        raise ValueError(f"r must be positive, got {r!r}")
    xi = coupling_xi(config)
    if config.ansatz is Ansatz.ONE_OVER_R:
        return -xi / r
    return -xi / r ** (config.dimension - 2)


@dataclass(frozen=True)
class CoefficientSet:
    """Immutable bundle of the coefficient functions of one radial equation.

    All callables accept scalars or numpy arrays of rho > 0. ``match_level``
    is the energy-side constant paired with ``v_fn`` in w = q (level - V);
    ``turning_scale`` sets the outermost turning radius (~ 4 * turning_scale)
    and drives the automatic grid sizing. ``indicial_exponent`` is the
    positive small-rho exponent of the regular solution where one exists
    (None in the fall-to-center regime). ``singular_power`` is the power in
    V = s / (rho^power q).
    """

    p_fn: Callable
    q_fn: Callable
    v_fn: Callable
    s_fn: Callable
    w_fn: Callable
    p_prime_fn: Callable
    weight_fn: Callable
    integrating_factor_fn: Callable
    match_level: float
    turning_scale: float
    indicial_exponent: float | None
    singular_power: int
    dimension: int
    branch: str
    # scalars needed to rebuild the functions in vectorized form
    k_value: float
    a_const: float
    c_const: float
    lambda_d3: float
    xi: float
    eta: float


@dataclass(frozen=True)
class CanonicalForm:
    """First-derivative-free reduction chi'' + W chi = 0 with phi = factor * chi."""

    weight: Callable
    integrating_factor: Callable


def canonical_weight(coeffs: CoefficientSet) -> CanonicalForm:
    """Canonical-form weight W = w - p^2/4 - p'/2 and its integrating factor.

    The integrating factor exp(-1/2 int p d rho) is evaluated in closed form,
    (den / rho^(D-2))^(1/2) up to normalization, so no quadrature error enters
    the canonical path.
    """
    return CanonicalForm(weight=coeffs.weight_fn, integrating_factor=coeffs.integrating_factor_fn)


def _as_float_array(rho):
    arr = np.asarray(rho, dtype=float)
    return arr, arr.ndim == 0


def _maybe_scalar(values, scalar: bool):
    return float(values) if scalar else values


def _check_denominator(den, rho, scale):
    # relative test: a denominator cancelled to ~1e-12 of its term magnitudes
    # sits numerically on the pole and any value there would be garbage
    bad = np.abs(den) <= 1e-12 * scale
    if np.any(bad):
        rho_bad = np.atleast_1d(np.asarray(rho))[np.atleast_1d(bad)]
        raise DenominatorVanishes(float(rho_bad[0]))


def _rho_powers(rho: np.ndarray, d: int):
    """rho^(D-3), rho^(D-4), rho^(2(D-3)), rho^(D-2) with exact low-D cases."""
    if d == 3:
        r_d3 = np.ones_like(rho)
        r_d4 = 1.0 / rho
    elif d == 4:
        r_d3 = rho
        r_d4 = np.ones_like(rho)
    elif d == 5:
        r_d3 = rho * rho
        r_d4 = rho
    else:
        r_d3 = rho ** (d - 3)
        r_d4 = rho ** (d - 4)
    return r_d3, r_d4, r_d3 * r_d3, r_d3 * rho


def general_fields(rho, d, kval, a_const, c_const, lam_d3, tau, sigma):
    """Evaluate p, p', q, s, V, w for the 1/r^(D-2) equation on rho (array or scalar).

    Shared by the public closures and the solver's vectorized paths so there
    is a single transcription of the formulas.
    """
    arr, scalar = _as_float_array(rho)
    dm3 = d - 3
    r_d3, r_d4, r_2d6, r_d2 = _rho_powers(arr, d)
    den = c_const * r_d3 + sigma * a_const
    if c_const < 0.0 or sigma < 0.0:
        _check_denominator(den, arr, abs(c_const) * r_d3 + abs(a_const))
    a_over_den = sigma * dm3 * a_const / den
    p = (1.0 + a_over_den) / arr
    p_prime = -(1.0 + a_over_den) / arr ** 2 - sigma * dm3 * dm3 * a_const * c_const * r_d4 / (
        arr * den * den
    )
    q = (1.0 + sigma * dm3 * c_const * r_d4 / den) / r_d2
    s = (
        r_d2 / 4.0
        - sigma * (r_d3 / 2.0) * (1.0 + a_over_den)
        + (kval * kval - a_const * a_const * lam_d3 / r_2d6) * r_d4
    )
    v = s / (r_d2 * q)
    w = q * tau - s / r_d2
    out = {"p": p, "p_prime": p_prime, "q": q, "s": s, "v": v, "w": w, "den": den}
    if scalar:
        out = {key: float(val) for key, val in out.items()}
    return out


def coefficient_set(
    state: DimensionlessState, config: PhysicalConfig, branch: str = "plus"
) -> CoefficientSet:
    """Coefficient set of the phi_+ (or phi_-) equation for the 1/r^(D-2) potential.

    Parameters
    ----------
    state : DimensionlessState
        Trial-energy scalars (eta, lambda, A, tau, tau').
    config : PhysicalConfig
        Must use Ansatz.GENERALIZED with D >= 3.
    branch : {"plus", "minus"}
        Which decoupled component the equation describes. Only the plus
        branch is validated against reference data; the minus branch is
        provided for completeness.

    Raises
    ------
    UnsupportedDimension
        For D <= 2 (via the coupling), delegated to callers building xi.
    DenominatorVanishes
        Lazily, when a closure is evaluated at a node where
        c rho^(D-3) + sigma A = 0 (possible for K < 0 or the minus branch).
    """
    if branch not in _BRANCHES:
        raise ValueError(f"branch must be 'plus' or 'minus', got {branch!r}")
    if config.ansatz is not Ansatz.GENERALIZED:
        raise ValueError("coefficient_set expects the 1/r^(D-2) potential; "
                         "use coefficient_set_ansatz1 for the 1/r convention")
    sigma = _BRANCHES[branch]
    d = config.dimension
    if d <= 2:
        raise UnsupportedDimension(f"the 1/r^(D-2) equation needs D >= 3, got D = {d}")
    kval = state.k_value
    lam = state.lambda_
    a_const = state.a_const
    if d == 4:
        c_const = kval
        lam_d3 = lam
    else:
        c_const = kval * lam ** ((4.0 - d) / 2.0)
        lam_d3 = 1.0 if d == 3 else lam ** (d - 3)
    tau = state.tau

    def _field(name):
        def fn(rho):
            return general_fields(rho, d, kval, a_const, c_const, lam_d3, tau, sigma)[name]

        return fn

    p_fn = _field("p")
    q_fn = _field("q")
    v_fn = _field("v")
    s_fn = _field("s")
    w_fn = _field("w")
    p_prime_fn = _field("p_prime")

    def weight_fn(rho):
        f = general_fields(rho, d, kval, a_const, c_const, lam_d3, tau, sigma)
        return f["w"] - f["p"] * f["p"] / 4.0 - f["p_prime"] / 2.0

    def integrating_factor_fn(rho):
        # exp(-1/2 int p) = sqrt(den / rho^(D-2)), from the partial-fraction
        # closed form int p = (D-2) ln rho - ln den.
        arr, scalar = _as_float_array(rho)
        r_d3, _, _, r_d2 = _rho_powers(arr, d)
        den = c_const * r_d3 + sigma * a_const
        if c_const < 0.0 or sigma < 0.0:
            _check_denominator(den, arr, abs(c_const) * r_d3 + abs(a_const))
        if np.any(den < 0.0):
            bad = arr[np.atleast_1d(den < 0.0)]
            raise DenominatorVanishes(
                float(np.atleast_1d(bad)[0]),
                "integrating factor undefined where c rho^(D-3) + sigma A < 0",
            )
        return _maybe_scalar(np.sqrt(den / r_d2), scalar)

    # Regular small-rho exponent: only at D = 3, where the rho^-2 coefficient
    # is K^2 - xi^2. For D >= 4 the attractive rho^(-2(D-2)) term dominates
    # every centrifugal barrier (fall to center): no real exponent survives.
    gamma2 = kval * kval - state.xi * state.xi
    indicial = math.sqrt(gamma2) if (d == 3 and gamma2 > 0.0) else None

    return CoefficientSet(
        p_fn=p_fn,
        q_fn=q_fn,
        v_fn=v_fn,
        s_fn=s_fn,
        w_fn=w_fn,
        p_prime_fn=p_prime_fn,
        weight_fn=weight_fn,
        integrating_factor_fn=integrating_factor_fn,
        match_level=tau,
        turning_scale=abs(state.tau_prime),
        indicial_exponent=indicial,
        singular_power=d - 2,
        dimension=d,
        branch=branch,
        k_value=kval,
        a_const=a_const,
        c_const=c_const,
        lambda_d3=lam_d3,
        xi=state.xi,
        eta=state.eta,
    )


def ansatz1_fields(rho, gamma2, tau, sigma):
    """p, p', q, s, V, w for the 1/r potential (three-dimensional structure, any D)."""
    arr, scalar = _as_float_array(rho)
    p = 1.0 / arr
    p_prime = -1.0 / (arr * arr)
    q = 1.0 / arr
    s = arr / 4.0 - sigma * 0.5 + gamma2 / arr
    v = s
    w = (tau - s) / arr
    out = {"p": p, "p_prime": p_prime, "q": q, "s": s, "v": v, "w": w}
    if scalar:
        out = {key: float(val) for key, val in out.items()}
    return out


def coefficient_set_ansatz1(
    state: DimensionlessState, config: PhysicalConfig, branch: str = "plus"
) -> CoefficientSet:
    """Coefficient set for the 1/r potential in D dimensions.

    Under rho = 2 r sqrt(M^2 - E^2) the 1/r problem keeps its
    three-dimensional form for every D; all dimensional dependence rides on
    K. The energy-side constant is therefore tau = xi eta / sqrt(lambda)
    irrespective of D, and

        w = -1/4 + (tau + sigma/2)/rho - (K^2 - xi^2)/rho^2.
    """
    if branch not in _BRANCHES:
        raise ValueError(f"branch must be 'plus' or 'minus', got {branch!r}")
    sigma = _BRANCHES[branch]
    kval = state.k_value
    xi = state.xi
    gamma2 = kval * kval - xi * xi
    sqrt_lam = math.sqrt(state.lambda_)
    tau = xi * state.eta / sqrt_lam
    tau_prime = xi / sqrt_lam

    def _field(name):
        def fn(rho):
            return ansatz1_fields(rho, gamma2, tau, sigma)[name]

        return fn

    def weight_fn(rho):
        f = ansatz1_fields(rho, gamma2, tau, sigma)
        # with p = 1/rho: -p^2/4 - p'/2 = +1/(4 rho^2)
        arr, scalar = _as_float_array(rho)
        out = f["w"] + 1.0 / (4.0 * arr * arr)
        return _maybe_scalar(out, scalar)

    def integrating_factor_fn(rho):
        arr, scalar = _as_float_array(rho)
        return _maybe_scalar(arr ** -0.5, scalar)

    return CoefficientSet(
        p_fn=_field("p"),
        q_fn=_field("q"),
        v_fn=_field("v"),
        s_fn=_field("s"),
        w_fn=_field("w"),
        p_prime_fn=_field("p_prime"),
        weight_fn=weight_fn,
        integrating_factor_fn=integrating_factor_fn,
        match_level=tau,
        turning_scale=abs(tau_prime),
        indicial_exponent=math.sqrt(gamma2) if gamma2 > 0.0 else None,
        singular_power=1,
        dimension=config.dimension,
        branch=branch,
        k_value=kval,
        a_const=xi,
        c_const=0.0,
        lambda_d3=1.0,
        xi=xi,
        eta=state.eta,
    )


def build_coefficients(
    state: DimensionlessState, config: PhysicalConfig, branch: str = "plus"
) -> CoefficientSet:
    """Dispatch to the coefficient set matching the configured potential."""
    if config.ansatz is Ansatz.ONE_OVER_R:
        return coefficient_set_ansatz1(state, config, branch)
    return coefficient_set(state, config, branch)
