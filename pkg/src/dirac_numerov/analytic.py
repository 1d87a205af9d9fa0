"""Closed-form reference results for the 1/r relativistic Coulomb problem.

The 1/r Dirac-Coulomb problem is exactly solvable in every spatial dimension
once all dimensional dependence is absorbed into K = +-(2l + D - 1)/2:

    E/M = [1 + xi^2 / (n_r + gamma)^2]^(-1/2),   gamma = sqrt(K^2 - xi^2).

For the nodeless ground level (n_r = 0) the radial function collapses to
rho^gamma exp(-rho/2): the confluent hypergeometric factor truncates to 1.
These closed forms are the oracle the shooting solver is validated against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coefficients import coupling_xi
from .core import Ansatz, PhysicalConfig, k_value
from .errors import DomainError, NonConvergence, SupercriticalCoupling, UnsupportedCase

_SERIES_EPS = 1e-14
_MAX_TERMS = 100_000
_Z_WINDOW = 500.0


@dataclass(frozen=True)
class AnalyticLevel:
    """One closed-form level: radial quantum number, E/M, and indicial exponent."""

    n_r: int
    energy_ratio: float
    gamma_exp: float


def analytic_energy(config: PhysicalConfig, n_r: int = 0, xi: float | None = None) -> AnalyticLevel:
    """Closed-form E/M of the 1/r problem for radial quantum number n_r.

    Parameters
    ----------
    config : PhysicalConfig
        Must use Ansatz.ONE_OVER_R (the 1/r^(D-2) problem has no closed form).
    n_r : int
        Radial quantum number, >= 0. n_r = 0 is the nodeless ground level.
    xi : float, optional
        Coupling override for limit checks; defaults to the configured value.

    Raises
    ------
    SupercriticalCoupling
        If |K| <= xi (the indicial exponent turns imaginary).
    UnsupportedCase
        For the 1/r^(D-2) potential.
    """
    if config.ansatz is not Ansatz.ONE_OVER_R:
        raise UnsupportedCase("closed-form energies exist only for the 1/r potential")
    if n_r < 0:
        raise ValueError(f"n_r must be >= 0, got {n_r}")
    if xi is None:
        xi = coupling_xi(config)
    kval = k_value(config)
    gamma2 = kval * kval - xi * xi
    if gamma2 <= 0.0:
        raise SupercriticalCoupling(f"|K| = {abs(kval)} <= xi = {xi}")
    gamma = math.sqrt(gamma2)
    ratio = 1.0 / math.sqrt(1.0 + (xi / (n_r + gamma)) ** 2)
    return AnalyticLevel(n_r=n_r, energy_ratio=ratio, gamma_exp=gamma)


def analytic_ground_wavefunction_d3(rho_nodes, config: PhysicalConfig) -> np.ndarray:
    """Analytic three-dimensional ground-state phi_+ on the given uniform nodes.

    Returns rho^gamma exp(-rho/2) normalized to unit discrete L2 norm
    (step * sum of squares convention, matching the solver's normalization).
    """
    if config.dimension != 3 or config.ell != 0:
        raise UnsupportedCase("closed-form wavefunction available only for D = 3, l = 0")
    xi = coupling_xi(config)
    kval = abs(k_value(config))
    gamma2 = kval * kval - xi * xi
    if gamma2 <= 0.0:
        raise SupercriticalCoupling(f"|K| = {kval} <= xi = {xi}")
    gamma = math.sqrt(gamma2)
    rho = np.asarray(rho_nodes, dtype=float)
    if rho.ndim != 1 or rho.size < 2:
        raise ValueError("rho_nodes must be a 1-d array with at least two nodes")
    steps = np.diff(rho)
    if np.any(rho <= 0.0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ValueError("rho_nodes must be positive and uniformly spaced")
    phi = rho**gamma * np.exp(-rho / 2.0)
    norm = math.sqrt(float(steps[0]) * float(np.dot(phi, phi)))
    return phi / norm


def hyp1f1(a: float, b: float, z: float) -> float:
    """Confluent hypergeometric function 1F1(a; b; z) by Kummer series.

    The series is summed with term-ratio stopping to relative 1e-14.
    Non-positive-integer ``a`` short-circuits to the exact terminating
    polynomial. Negative arguments route through the Kummer transformation
    1F1(a;b;z) = e^z 1F1(b-a;b;-z) so every summed series has positive
    argument (no catastrophic cancellation). Validity window |z| <= 500.

    Raises
    ------
    DomainError
        If b is a non-positive integer (pole) or |z| exceeds the window.
    NonConvergence
        If the series fails to settle within 100000 terms.
    """
    if b <= 0.0 and b == math.floor(b):
        raise DomainError(f"1F1 pole: b = {b!r} is a non-positive integer")
    if abs(z) > _Z_WINDOW:
        raise DomainError(f"|z| = {abs(z)!r} outside the validity window {_Z_WINDOW}")
    if z == 0.0:
        return 1.0
    a_is_polynomial = a <= 0.0 and a == math.floor(a)
    if z < 0.0 and not a_is_polynomial:
        return math.exp(z) * hyp1f1(b - a, b, -z)
    if a_is_polynomial:
        # terminating series of degree -a, summed exactly
        degree = int(-a)
        total = 1.0
        term = 1.0
        for k in range(degree):
            term *= (a + k) * z / ((b + k) * (k + 1))
            total += term
        return total
    total = 1.0
    term = 1.0
    for k in range(_MAX_TERMS):
        term *= (a + k) * z / ((b + k) * (k + 1))
        total += term
        # past the term-magnitude hump, a small ratio means convergence
        if abs(term) <= _SERIES_EPS * abs(total) and k > z:
            return total
    raise NonConvergence(f"1F1({a}, {b}, {z}) did not converge in {_MAX_TERMS} terms")
