"""Fourth-order three-term propagation of the radial equation on a uniform grid.

Two interchangeable discretizations are provided:

* ``Scheme.GENERALIZED`` -- the three-term recurrence for
  phi'' + p phi' + w phi = 0 applied directly to phi, with step coefficients

      p0 = 1 - p h/2 + [w(x-h) + p'] h^2/12
      p1 = 2 {1 - [w(x) - p'/5] 5 h^2/12}
      p2 = 1 + p h/2 + [w(x+h) + p'] h^2/12.

  It is consistent for any p and fourth-order accurate when p == 0 (where it
  coincides with classical Numerov); with a first-derivative term present its
  truncation error degrades to second order. ``scheme_report`` measures this
  empirically, including the transcription-ambiguous sign of the p'/5 term.

* ``Scheme.CANONICAL`` -- classical Numerov on the first-derivative-free form
  chi'' + W chi = 0, W = w - p^2/4 - p'/2, with phi = factor * chi through the
  closed-form integrating factor. This is the production path: textbook
  fourth order everywhere. Eigenvalues from the two paths are cross-checked
  in the acceptance suite.

Eigenvalue searches compare log-derivatives, which are invariant under the
overall scale of a propagated solution, so seeds may be supplied in any
convenient normalization. Magnitudes beyond 1e100 are renormalized by an
exact power of two, applied retroactively so the stored samples remain one
globally-scaled solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .coefficients import CoefficientSet
from .core import RadialGrid
from .errors import NonFiniteValue, SingularCoefficient

RESCALE_THRESHOLD = 1e100
# power-of-two factor keeps rescaling exact in binary floating point
_RESCALE_FACTOR = math.ldexp(1.0, -400)


class Scheme(Enum):
    GENERALIZED = "generalized"
    CANONICAL = "canonical"


class Direction(Enum):
    LEFT_TO_RIGHT = 1
    RIGHT_TO_LEFT = -1


@dataclass
class PropagationResult:
    """Node samples of a propagated solution plus rescaling bookkeeping.

    ``values`` is in phi space for both schemes (canonical chi samples are
    mapped back through the integrating factor). ``log_derivative_at`` uses
    the three-point centered estimate in the interior and one-sided ones at
    the ends; it is invariant under global rescaling of the values.
    """

    values: np.ndarray
    step: float
    overflowed: bool
    rescale_count: int

    def log_derivative_at(self, index: int) -> float:
        y = self.values
        n = len(y)
        h = self.step
        if not 0 <= index < n:
            raise IndexError(f"node {index} outside 0..{n - 1}")
        if y[index] == 0.0:
            return math.inf
        if index == 0:
            num = -3.0 * y[0] + 4.0 * y[1] - y[2]
        elif index == n - 1:
            num = 3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]
        else:
            num = y[index + 1] - y[index - 1]
        return float(num) / (2.0 * h * float(y[index]))


# ---------------------------------------------------------------------------
# scalar step operations


def _generalized_p012(p, p_prime, w_prev, w_here, w_next, delta):
    h2_12 = delta * delta / 12.0
    p0 = 1.0 - p * delta / 2.0 + (w_prev + p_prime) * h2_12
    p1 = 2.0 * (1.0 - (w_here - p_prime / 5.0) * 5.0 * h2_12)
    p2 = 1.0 + p * delta / 2.0 + (w_next + p_prime) * h2_12
    return p0, p1, p2


def generalized_step(
    phi_prev: float, phi_curr: float, rho: float, delta: float, coeffs: CoefficientSet
) -> float:
    """Advance phi one step: given phi(rho - delta), phi(rho), return phi(rho + delta)."""
    p0, p1, p2 = _generalized_p012(
        coeffs.p_fn(rho),
        coeffs.p_prime_fn(rho),
        coeffs.w_fn(rho - delta),
        coeffs.w_fn(rho),
        coeffs.w_fn(rho + delta),
        delta,
    )
    if p2 == 0.0:
        raise SingularCoefficient(f"p2 vanishes at rho = {rho!r}")
    return (p1 * phi_curr - p0 * phi_prev) / p2


def canonical_step(chi_prev: float, chi_curr: float, rho: float, delta: float, weight) -> float:
    """Advance chi one step with classical Numerov on chi'' + W chi = 0."""
    h2_12 = delta * delta / 12.0
    f_prev = 1.0 + h2_12 * weight(rho - delta)
    f_here = 1.0 + h2_12 * weight(rho)
    f_next = 1.0 + h2_12 * weight(rho + delta)
    if f_next == 0.0:
        raise SingularCoefficient(f"1 + delta^2 W/12 vanishes at rho = {rho + delta!r}")
    return ((12.0 - 10.0 * f_here) * chi_curr - f_prev * chi_prev) / f_next


# ---------------------------------------------------------------------------
# tight sweep loops (python lists; numpy scalar indexing is several times
# slower inside a per-node loop)


def _numerov_sweep_lr(f, values, start, stop):
    """Fill values[start+1 .. stop] with y[i+1] = ((12-10 f_i) y_i - f_{i-1} y_{i-1}) / f_{i+1}."""
    y0 = values[start - 1]
    y1 = values[start]
    overflowed = False
    rescales = 0
    try:
        for i in range(start, stop):
            y2 = ((12.0 - 10.0 * f[i]) * y1 - f[i - 1] * y0) / f[i + 1]
            if y2 > RESCALE_THRESHOLD or y2 < -RESCALE_THRESHOLD:
                overflowed = True
                rescales += 1
                y1 *= _RESCALE_FACTOR
                y2 *= _RESCALE_FACTOR
                for j in range(i + 1):
                    values[j] *= _RESCALE_FACTOR
            values[i + 1] = y2
            y0, y1 = y1, y2
    except ZeroDivisionError:
        raise SingularCoefficient(f"1 + delta^2 W/12 vanishes at node {i + 1}") from None
    return overflowed, rescales


def _numerov_sweep_rl(f, values, start, stop):
    """Fill values[start-1 .. stop] with y[i-1] = ((12-10 f_i) y_i - f_{i+1} y_{i+1}) / f_{i-1}."""
    y0 = values[start + 1]
    y1 = values[start]
    overflowed = False
    rescales = 0
    try:
        for i in range(start, stop, -1):
            y2 = ((12.0 - 10.0 * f[i]) * y1 - f[i + 1] * y0) / f[i - 1]
            if y2 > RESCALE_THRESHOLD or y2 < -RESCALE_THRESHOLD:
                overflowed = True
                rescales += 1
                y1 *= _RESCALE_FACTOR
                y2 *= _RESCALE_FACTOR
                for j in range(i, len(values)):
                    values[j] *= _RESCALE_FACTOR
            values[i - 1] = y2
            y0, y1 = y1, y2
    except ZeroDivisionError:
        raise SingularCoefficient(f"1 + delta^2 W/12 vanishes at node {i - 1}") from None
    return overflowed, rescales


def _general_sweep_lr(p0, p1, p2, values, start, stop):
    """Fill values[start+1 .. stop] with y[i+1] = (p1_i y_i - p0_i y_{i-1}) / p2_i."""
    y0 = values[start - 1]
    y1 = values[start]
    overflowed = False
    rescales = 0
    try:
        for i in range(start, stop):
            y2 = (p1[i] * y1 - p0[i] * y0) / p2[i]
            if y2 > RESCALE_THRESHOLD or y2 < -RESCALE_THRESHOLD:
                overflowed = True
                rescales += 1
                y1 *= _RESCALE_FACTOR
                y2 *= _RESCALE_FACTOR
                for j in range(i + 1):
                    values[j] *= _RESCALE_FACTOR
            values[i + 1] = y2
            y0, y1 = y1, y2
    except ZeroDivisionError:
        raise SingularCoefficient(f"p2 vanishes at node {i}") from None
    return overflowed, rescales


def _general_sweep_rl(p0, p1, p2, values, start, stop):
    """Fill values[start-1 .. stop] with y[i-1] = (p1_i y_i - p2_i y_{i+1}) / p0_i."""
    y0 = values[start + 1]
    y1 = values[start]
    overflowed = False
    rescales = 0
    try:
        for i in range(start, stop, -1):
            y2 = (p1[i] * y1 - p2[i] * y0) / p0[i]
            if y2 > RESCALE_THRESHOLD or y2 < -RESCALE_THRESHOLD:
                overflowed = True
                rescales += 1
                y1 *= _RESCALE_FACTOR
                y2 *= _RESCALE_FACTOR
                for j in range(i, len(values)):
                    values[j] *= _RESCALE_FACTOR
            values[i - 1] = y2
            y0, y1 = y1, y2
    except ZeroDivisionError:
        raise SingularCoefficient(f"p0 vanishes at node {i}") from None
    return overflowed, rescales


def _canonical_factors(weight_values, delta):
    return 1.0 + (delta * delta / 12.0) * np.asarray(weight_values, dtype=float)


def _generalized_arrays(p, p_prime, w, delta):
    """Vectorized p0/p1/p2 over all nodes (edge entries are fillers, never stepped from)."""
    w = np.asarray(w, dtype=float)
    w_prev = np.concatenate(([w[0]], w[:-1]))
    w_next = np.concatenate((w[1:], [w[-1]]))
    return _generalized_p012(np.asarray(p, float), np.asarray(p_prime, float), w_prev, w, w_next, delta)


def propagate(
    grid: RadialGrid,
    coeffs: CoefficientSet,
    direction: Direction,
    seeds: tuple,
    scheme: Scheme = Scheme.CANONICAL,
    stop_index: int | None = None,
) -> PropagationResult:
    """Propagate the radial solution across the grid from two seed values.

    Parameters
    ----------
    grid : RadialGrid
    coeffs : CoefficientSet
    direction : Direction
        LEFT_TO_RIGHT seeds nodes (0, 1); RIGHT_TO_LEFT seeds (N-1, N-2).
    seeds : (float, float)
        phi values at the two boundary-adjacent nodes, in propagation order.
    scheme : Scheme
        CANONICAL propagates chi and maps back to phi through the
        integrating factor; GENERALIZED propagates phi directly.
    stop_index : int, optional
        Final node to fill (inclusive). Defaults to the far end. Nodes
        beyond it are NaN and must not be read.

    Raises
    ------
    NonFiniteValue
        If NaN/inf appears in the filled range despite rescaling (a
        coefficient singularity inside the interval).
    """
    nodes = grid.nodes()
    n = grid.n_points
    delta = grid.step
    values = [0.0] * n
    if direction is Direction.LEFT_TO_RIGHT:
        seed_nodes = (0, 1)
        last = n - 1 if stop_index is None else stop_index
    else:
        seed_nodes = (n - 1, n - 2)
        last = 0 if stop_index is None else stop_index

    if scheme is Scheme.CANONICAL:
        factor = np.asarray(coeffs.integrating_factor_fn(nodes), dtype=float)
        f = _canonical_factors(coeffs.weight_fn(nodes), delta).tolist()
        values[seed_nodes[0]] = seeds[0] / factor[seed_nodes[0]]
        values[seed_nodes[1]] = seeds[1] / factor[seed_nodes[1]]
        if direction is Direction.LEFT_TO_RIGHT:
            overflowed, rescales = _numerov_sweep_lr(f, values, 1, last)
        else:
            overflowed, rescales = _numerov_sweep_rl(f, values, n - 2, last)
        out = np.asarray(values) * factor
    else:
        p0, p1, p2 = _generalized_arrays(
            coeffs.p_fn(nodes), coeffs.p_prime_fn(nodes), coeffs.w_fn(nodes), delta
        )
        p0, p1, p2 = p0.tolist(), p1.tolist(), p2.tolist()
        values[seed_nodes[0]] = seeds[0]
        values[seed_nodes[1]] = seeds[1]
        if direction is Direction.LEFT_TO_RIGHT:
            overflowed, rescales = _general_sweep_lr(p0, p1, p2, values, 1, last)
        else:
            overflowed, rescales = _general_sweep_rl(p0, p1, p2, values, n - 2, last)
        out = np.asarray(values)

    lo = min(seed_nodes[0], last)
    hi = max(seed_nodes[0], last)
    if not np.all(np.isfinite(out[lo : hi + 1])):
        raise NonFiniteValue("propagation produced non-finite samples")
    if stop_index is not None:
        if direction is Direction.LEFT_TO_RIGHT and last < n - 1:
            out[last + 1 :] = np.nan
        elif direction is Direction.RIGHT_TO_LEFT and last > 0:
            out[:last] = np.nan
    return PropagationResult(values=out, step=delta, overflowed=overflowed, rescale_count=rescales)


def measured_order(errors) -> float:
    """Mean convergence order implied by errors at successive step halvings."""
    errs = np.asarray(errors, dtype=float)
    ratios = errs[:-1] / errs[1:]
    return float(np.mean(np.log2(ratios)))


def scheme_report() -> dict:
    """Empirical cross-validation of the two step schemes.

    Convergence orders come from y = exp(-x^2/2), which solves both
    chi'' + (1 - x^2) chi = 0 (first-derivative-free) and
    y'' + y'/x + (2 - x^2) y = 0; the variant with the sign of the p'/5
    correction in p1 flipped is run as well, and turns out inconsistent (its
    error does not shrink with the step), settling the printed sign as the
    only viable reading.

    The agreement gate uses the production-like structure
    y'' + y'/rho + [-1/4 + (3/2)/rho - 1/rho^2] y = 0 with exact solution
    rho exp(-rho/2), transported across [1, 14] at h = 1e-3: unlike the
    Gaussian test, its subdominant partner grows only like exp(+rho/2), so
    decaying transport is well conditioned there.

    Returns a dict with ``orders``, ``errors``, ``agreement`` (max relative
    deviation generalized vs canonical on the Coulomb-like case), and
    ``text``.
    """
    steps = [0.08, 0.04, 0.02, 0.01]

    def gaussian_case(h, which):
        a, b = 0.2, 2.2
        n = int(round((b - a) / h)) + 1
        x = np.linspace(a, b, n)
        exact = np.exp(-x * x / 2.0)
        values = [0.0] * n
        values[0], values[1] = float(exact[0]), float(exact[1])
        if which == "canonical":
            f = _canonical_factors(1.0 - x * x, h).tolist()
            _numerov_sweep_lr(f, values, 1, n - 1)
        else:
            p = 1.0 / x
            pp = -1.0 / (x * x)
            w = 2.0 - x * x
            p0, p1g, p2 = _generalized_arrays(p, pp, w, h)
            if which == "generalized_flipped":
                # flip only the p'/5 correction inside p1
                _, p1g, _ = _generalized_arrays(p, -pp, w, h)
            p0, p1g, p2 = p0.tolist(), p1g.tolist(), p2.tolist()
            _general_sweep_lr(p0, p1g, p2, values, 1, n - 1)
        y = np.asarray(values)
        return float(np.max(np.abs(y - exact)))

    orders = {}
    errors = {}
    for which in ("canonical", "generalized", "generalized_flipped"):
        errs = [gaussian_case(h, which) for h in steps]
        errors[which] = errs
        orders[which] = measured_order(errs)

    def coulomb_case(which):
        h = 1e-3
        a, b = 1.0, 6.0
        n = int(round((b - a) / h)) + 1
        x = np.linspace(a, b, n)
        exact = x * np.exp(-x / 2.0)
        values = [0.0] * n
        values[0], values[1] = float(exact[0]), float(exact[1])
        p = 1.0 / x
        pp = -1.0 / (x * x)
        w = -0.25 + 1.5 / x - 1.0 / (x * x)
        if which == "canonical":
            f = _canonical_factors(w + 0.25 / (x * x), h).tolist()  # W = w + 1/(4 rho^2)
            chi = [0.0] * n
            chi[0] = values[0] * math.sqrt(x[0])
            chi[1] = values[1] * math.sqrt(x[1])
            _numerov_sweep_lr(f, chi, 1, n - 1)
            return np.asarray(chi) / np.sqrt(x), exact
        p0, p1g, p2 = _generalized_arrays(p, pp, w, h)
        _general_sweep_lr(p0.tolist(), p1g.tolist(), p2.tolist(), values, 1, n - 1)
        return np.asarray(values), exact

    y_gen, exact = coulomb_case("generalized")
    y_can, _ = coulomb_case("canonical")
    agreement = float(np.max(np.abs(y_gen - y_can) / np.abs(exact)))

    lines = [
        "integrator scheme diagnostic",
        "  order probe y = exp(-x^2/2) on [0.2, 2.2], steps "
        + ", ".join(str(h) for h in steps),
        f"  canonical (first-derivative-free) measured order: {orders['canonical']:.2f}",
        f"  generalized (printed three-term coefficients)  : {orders['generalized']:.2f}"
        " (degrades from 4th order when a first-derivative term is present)",
        f"  generalized with p'/5 sign flipped             : {orders['generalized_flipped']:.2f}"
        " (inconsistent; the printed sign is the only viable reading)",
        "  agreement probe rho exp(-rho/2) on [1, 6] at h = 1e-3:",
        f"  generalized vs canonical max relative deviation: {agreement:.2e}",
        "  production eigenvalue searches default to the canonical path; the",
        "  generalized path is accepted where the two agree (<= 1e-7 on",
        "  validation solutions, <= 1e-8 on eigenvalue ratios).",
    ]
    return {"orders": orders, "errors": errors, "agreement": agreement, "text": "\n".join(lines)}
