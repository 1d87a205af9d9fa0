"""Match-point shooting for the ground state, and certified-absence scans.

The search parameter is the energy ratio eta = E/M. For each trial eta the
solver

1. builds the coefficient set and a grid sized to cover the outermost
   classical turning point with decay margin,
2. looks for an *interior* classically-allowed island of tau - V(rho):
   a region bounded by forbidden zones on both sides. An allowed region
   attached to the inner grid boundary is the fall-to-center funnel of the
   supersingular 1/r^(D-2) attraction (D >= 4), not a bound-state well, and
   certifies "no turning point" exactly as a dense evaluation of V does,
3. integrates from both ends to the island's outer turning node and forms
   the log-derivative mismatch Delta(eta),
4. bisects every sign change of Delta, accepting a root only when the final
   |Delta| passes the mismatch tolerance (log-derivative poles also flip the
   sign but never pass).

Bound levels accumulate at eta -> 1, so the scan grid is uniform in
ln(1 - eta^2): resolution concentrates where the spectrum lives. The scan
ascends in eta and stops at the first accepted root, which is the deepest
binding (the ground state; excited states lie at larger eta).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .coefficients import CoefficientSet, build_coefficients
from .core import (
    Ansatz,
    EigenResult,
    PhysicalConfig,
    RadialGrid,
    WaveSolution,
    dimensionless_state,
    discrete_l2_norm,
    reconstruct_fg,
)
from .errors import ConfigError, NonFiniteValue
from .numerov import (
    Scheme,
    _canonical_factors,
    _general_sweep_lr,
    _general_sweep_rl,
    _generalized_arrays,
    _numerov_sweep_lr,
    _numerov_sweep_rl,
)


class NoTurningPoint:
    """Sentinel: the trial energy has no interior classically-allowed island."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NoTurningPoint"


NO_TURNING_POINT = NoTurningPoint()

_MAX_GRID_POINTS = 20_000_000


@dataclass(frozen=True)
class SolverSettings:
    """Knobs of the eigenvalue search.

    The automatic grid covers the outermost turning radius (about
    4 * turning_scale) plus 44 units of decay margin (the far tail falls as
    exp(-rho/2), so the margin suppresses contamination of the inward sweep
    by ~exp(-22)), with a floor of 50; ``grid_b_scale`` multiplies the
    automatic extent, ``grid_b`` overrides it outright. ``scan_points``
    trial energies are spaced uniformly in ln(1 - eta^2) across
    ``eta_window``.
    """

    eta_window: tuple = (0.5, 1.0 - 1e-9)
    scan_points: int = 2000
    root_tol: float = 1e-12
    mismatch_tol: float = 1e-8
    grid_a: float = 1e-6
    grid_b: float | None = None
    grid_b_scale: float = 1.0
    grid_delta: float = 1e-3
    scheme: Scheme = Scheme.CANONICAL
    min_island_nodes: int = 3

    def __post_init__(self):
        lo, hi = self.eta_window
        if not (0.0 < lo < hi < 1.0):
            raise ConfigError(
                f"eta_window must satisfy 0 < lo < hi < 1, got {self.eta_window!r} "
                "(negative-energy searches are out of scope)"
            )
        if self.scan_points < 2:
            raise ConfigError(f"scan_points must be >= 2, got {self.scan_points}")
        if not (self.root_tol > 0.0 and self.mismatch_tol > 0.0):
            raise ConfigError("tolerances must be positive")
        if not self.grid_a > 0.0:
            raise ConfigError(f"grid_a must be positive, got {self.grid_a}")
        if not self.grid_delta > 0.0:
            raise ConfigError(f"grid_delta must be positive, got {self.grid_delta}")
        if self.grid_b is not None and self.grid_b <= self.grid_a:
            raise ConfigError("grid_b must exceed grid_a")
        if not self.grid_b_scale > 0.0:
            raise ConfigError("grid_b_scale must be positive")
        if self.min_island_nodes < 1:
            raise ConfigError("min_island_nodes must be >= 1")

    def resolve_grid(self, turning_scale: float) -> RadialGrid:
        """Concrete grid for a trial with the given outer turning scale."""
        if self.grid_b is not None:
            b = self.grid_b
        else:
            b = max(50.0, 4.0 * turning_scale + 44.0) * self.grid_b_scale
            b = 10.0 * math.ceil(b / 10.0)  # quantized so per-grid caches hit
        n = int(math.ceil((b - self.grid_a) / self.grid_delta)) + 1
        n = max(n, 16)
        if n > _MAX_GRID_POINTS:
            raise ConfigError(
                f"grid would need {n} nodes (b = {b:.3g}, delta = {self.grid_delta:.3g}); "
                "narrow the eta window or coarsen the grid"
            )
        return RadialGrid(rho_min=self.grid_a, rho_max=b, n_points=n)


# ---------------------------------------------------------------------------
# interior-island detection


def _island_match_index(pos: np.ndarray, min_nodes: int) -> int | None:
    """Outer turning node of the outermost interior allowed island, else None.

    ``pos`` flags classically-allowed nodes. Islands touching the first node
    (the collapse funnel) or the last node (well truncated by the grid) do
    not qualify; neither do islands thinner than ``min_nodes``.
    """
    n = pos.shape[0]
    if not pos.any():
        return None
    flags = pos.view(np.int8)
    d = np.diff(flags)
    starts = np.flatnonzero(d == 1) + 1  # runs beginning after node 0
    if starts.size == 0:
        return None
    ends = np.flatnonzero(d == -1)  # last allowed node of terminated runs
    end_idx = np.searchsorted(ends, starts)
    for j in range(starts.size - 1, -1, -1):
        if end_idx[j] >= ends.size:
            continue  # island touches the outer boundary
        s = int(starts[j])
        e = int(ends[end_idx[j]])
        if e - s + 1 < min_nodes:
            continue
        m = e + 1  # first forbidden node beyond the outer turning point
        if m > n - 3:
            continue  # no room for the centered derivative stencil
        return m
    return None


def find_match_point(coeffs: CoefficientSet, tau_prime: float, grid: RadialGrid):
    """Outermost turning radius where the energy level crosses V on the grid.

    Returns the node position rho just outside the outermost interior
    classically-allowed island of ``tau_prime - v_fn``, or None when no such
    island exists (either the level never reaches the potential well, or the
    only allowed region is the fall-to-center funnel attached to the inner
    cutoff and there is no bound-state well at all).

    The solver passes the coefficient set's own ``match_level`` here.
    """
    nodes = grid.nodes()
    g = tau_prime - np.asarray(coeffs.v_fn(nodes), dtype=float)
    m = _island_match_index(g > 0.0, min_nodes=3)
    return None if m is None else float(nodes[m])


@lru_cache(maxsize=32)
def _ansatz1_potential(grid: RadialGrid, gamma2: float, sigma: float):
    """V nodes and their minimum for the 1/r family (energy-independent)."""
    rho = grid.nodes()
    v = rho / 4.0 - sigma * 0.5 + gamma2 / rho
    v.setflags(write=False)
    return v, float(v.min())


@lru_cache(maxsize=32)
def _island_basis(grid: RadialGrid, d: int, kval: float, a_const: float):
    """Energy-independent arrays for the sign of tau - V, 1/r^(D-2) plus branch.

    With Q = rho^(D-2) q, den = c rho^(D-3) + A (both positive for K > 0),
    the allowed-region indicator sign(tau - V) equals sign(H) where

        H = (tau - V) Q den
          = c [tau (rho^(D-3) + (D-3) rho^(D-4)) - s0 rho^(D-3) + A^2 lam^(D-3) u rho^(D-3)]
          + A [tau - s0 + (D-3) rho^(D-3)/2 + A^2 lam^(D-3) u],

    s0 = rho^(D-2)/4 - rho^(D-3)/2 + K^2 rho^(D-4),  u = rho^(D-4)/rho^(2(D-3)).

    Division-free, so a 2000-point certification scan stays fast.
    """
    from .coefficients import _rho_powers

    rho = grid.nodes()
    r_d3, r_d4, r_2d6, r_d2 = _rho_powers(rho, d)
    dm3 = d - 3
    s0 = r_d2 / 4.0 - r_d3 / 2.0 + (kval * kval) * r_d4
    u = r_d4 / r_2d6
    basis = (
        r_d3 + dm3 * r_d4,          # multiplies c * tau
        s0 * r_d3,                  # multiplies -c
        u * r_d3,                   # multiplies c * A^2 lam^(D-3)
        dm3 * (r_d3 / 2.0) - s0,    # multiplies A
        u,                          # multiplies A^3 lam^(D-3)
    )
    for arr in basis:
        arr.setflags(write=False)
    return basis


def _match_index(coeffs: CoefficientSet, grid: RadialGrid, min_nodes: int) -> int | None:
    """Island detection with fast paths for the two production families."""
    level = coeffs.match_level
    if coeffs.c_const == 0.0:  # 1/r family: V does not depend on the energy
        sigma = 1.0 if coeffs.branch == "plus" else -1.0
        gamma2 = coeffs.k_value * coeffs.k_value - coeffs.xi * coeffs.xi
        v_nodes, v_min = _ansatz1_potential(grid, gamma2, sigma)
        if level <= v_min:
            return None
        return _island_match_index(level > v_nodes, min_nodes)
    if coeffs.branch == "plus" and coeffs.k_value > 0.0 and coeffs.a_const > 0.0:
        r34, s0r3, ur3, s0m, u = _island_basis(
            grid, coeffs.dimension, coeffs.k_value, coeffs.a_const
        )
        a2l = coeffs.a_const * coeffs.a_const * coeffs.lambda_d3
        # two scratch arrays, explicit out=: this sign test dominates the
        # certification scans, so avoid temporary churn
        h_sign = np.multiply(r34, level * coeffs.c_const)
        tmp = np.multiply(ur3, a2l * coeffs.c_const)
        np.add(h_sign, tmp, out=h_sign)
        np.multiply(s0r3, coeffs.c_const, out=tmp)
        np.subtract(h_sign, tmp, out=h_sign)
        np.multiply(u, a2l * coeffs.a_const, out=tmp)
        np.add(h_sign, tmp, out=h_sign)
        np.multiply(s0m, coeffs.a_const, out=tmp)
        np.add(h_sign, tmp, out=h_sign)
        h_sign += coeffs.a_const * level
        return _island_match_index(h_sign > 0.0, min_nodes)
    g = level - np.asarray(coeffs.v_fn(grid.nodes()), dtype=float)
    return _island_match_index(g > 0.0, min_nodes)


# ---------------------------------------------------------------------------
# mismatch evaluation


def _propagate_halves(coeffs: CoefficientSet, grid: RadialGrid, m: int, scheme: Scheme):
    """Sweep from both boundaries to the match node m.

    Returns (left, right) python lists: left holds nodes 0..m+1, right holds
    nodes m-1..N-1 (entries outside each range are zero fillers). Values are
    chi samples under the canonical scheme and phi samples under the
    generalized one; the mismatch converts to phi where needed.
    """
    nodes = grid.nodes()
    n = grid.n_points
    h = grid.step
    gamma = coeffs.indicial_exponent
    seed_inner = h**gamma if gamma is not None else h

    if scheme is Scheme.CANONICAL:
        f = _canonical_factors(coeffs.weight_fn(nodes), h).tolist()
        left = [0.0] * n
        left[1] = seed_inner / float(coeffs.integrating_factor_fn(float(nodes[1])))
        _numerov_sweep_lr(f, left, 1, m + 1)
        right = [0.0] * n
        right[n - 1] = 1.0 / float(coeffs.integrating_factor_fn(float(nodes[n - 1])))
        right[n - 2] = math.exp(h / 2.0) / float(coeffs.integrating_factor_fn(float(nodes[n - 2])))
        _numerov_sweep_rl(f, right, n - 2, m - 1)
    else:
        p0, p1, p2 = _generalized_arrays(
            coeffs.p_fn(nodes), coeffs.p_prime_fn(nodes), coeffs.w_fn(nodes), h
        )
        p0, p1, p2 = p0.tolist(), p1.tolist(), p2.tolist()
        left = [0.0] * n
        left[1] = seed_inner
        _general_sweep_lr(p0, p1, p2, left, 1, m + 1)
        right = [0.0] * n
        right[n - 1] = 1.0
        right[n - 2] = math.exp(h / 2.0)
        _general_sweep_rl(p0, p1, p2, right, n - 2, m - 1)
    return left, right


def _mismatch_at_match(coeffs, grid, m, scheme) -> float:
    """Delta = [phi'/phi]_left - [phi'/phi]_right at the match node (3-point centered)."""
    left, right = _propagate_halves(coeffs, grid, m, scheme)
    nodes = grid.nodes()
    h = grid.step
    if scheme is Scheme.CANONICAL:
        factors = [float(coeffs.integrating_factor_fn(float(nodes[j]))) for j in (m - 1, m, m + 1)]
    else:
        factors = [1.0, 1.0, 1.0]
    phi_l = [left[m - 1] * factors[0], left[m] * factors[1], left[m + 1] * factors[2]]
    phi_r = [right[m - 1] * factors[0], right[m] * factors[1], right[m + 1] * factors[2]]
    for val in (*phi_l, *phi_r):
        if not math.isfinite(val):
            raise NonFiniteValue("non-finite samples at the match node")
    if phi_l[1] == 0.0 or phi_r[1] == 0.0:
        return math.inf
    d_left = (phi_l[2] - phi_l[0]) / (2.0 * h * phi_l[1])
    d_right = (phi_r[2] - phi_r[0]) / (2.0 * h * phi_r[1])
    return d_left - d_right


def _evaluate_trial(eta: float, config: PhysicalConfig, settings: SolverSettings):
    """(delta, match_index, grid) for one trial energy; delta None if no island."""
    state = dimensionless_state(config, eta)
    coeffs = build_coefficients(state, config)
    grid = settings.resolve_grid(coeffs.turning_scale)
    m = _match_index(coeffs, grid, settings.min_island_nodes)
    if m is None:
        return None, None, grid
    try:
        delta_val = _mismatch_at_match(coeffs, grid, m, settings.scheme)
    except NonFiniteValue as exc:
        exc.eta = eta
        raise
    return delta_val, m, grid


def mismatch(eta: float, config: PhysicalConfig, settings: SolverSettings | None = None):
    """Log-derivative discontinuity Delta(eta), or NO_TURNING_POINT.

    Builds the coefficient set at the trial energy, propagates from both
    boundaries, and evaluates [phi'/phi]_left - [phi'/phi]_right at the
    outer turning node of the interior allowed island. Returns the
    NO_TURNING_POINT sentinel when no such island exists on the grid.
    """
    settings = settings or SolverSettings()
    delta_val, _, _ = _evaluate_trial(eta, config, settings)
    return NO_TURNING_POINT if delta_val is None else delta_val


def _scan_etas(window, n_points: int) -> np.ndarray:
    lo, hi = window
    lam_hi = (1.0 - lo) * (1.0 + lo)
    lam_lo = (1.0 - hi) * (1.0 + hi)
    lams = np.exp(np.linspace(math.log(lam_hi), math.log(lam_lo), n_points))
    etas = np.sqrt(1.0 - lams)
    etas[0] = lo
    etas[-1] = hi
    return etas


def mismatch_scan(config: PhysicalConfig, settings: SolverSettings | None = None):
    """Full (eta, Delta) sweep over the window, without root finding.

    Entries carry None where no interior island exists. Used by the profile
    export and by certification tests; ground-state searches use
    :func:`solve_ground_state`, which stops at the first accepted root.
    """
    settings = settings or SolverSettings()
    out = []
    for eta in _scan_etas(settings.eta_window, settings.scan_points):
        delta_val, _, _ = _evaluate_trial(float(eta), config, settings)
        out.append((float(eta), delta_val))
    return out


def _bisect_bracket(eta_lo, d_lo, eta_hi, d_hi, config, settings):
    """Shrink a sign-change bracket; return (eta, delta, m, grid) or None.

    Bisection continues past root_tol down to machine width if the mismatch
    has not yet met the acceptance tolerance: near weak binding d Delta/d eta
    is enormous, so the residual, not the bracket width, is the binding
    criterion. Poles converge too but never pass the residual test.
    """
    negative_lo = d_lo < 0.0
    last = None
    for _ in range(200):
        mid = 0.5 * (eta_lo + eta_hi)
        if mid == eta_lo or mid == eta_hi:
            break
        d_mid, m_mid, grid_mid = _evaluate_trial(mid, config, settings)
        if d_mid is None:
            return None  # island evaporated inside the bracket: not a root
        last = (mid, d_mid, m_mid, grid_mid)
        if d_mid == 0.0:
            break
        if (d_mid < 0.0) == negative_lo:
            eta_lo = mid
        else:
            eta_hi = mid
        if (eta_hi - eta_lo) <= settings.root_tol and abs(d_mid) <= settings.mismatch_tol:
            break
    if last is None:
        return None
    return last


def solve_ground_state(config: PhysicalConfig, settings: SolverSettings | None = None) -> EigenResult:
    """Locate the ground-state energy ratio, or certify its absence.

    Scans Delta(eta) upward across the eta window and bisects the first
    sign-change bracket whose converged mismatch passes the acceptance
    tolerance; that root is the deepest-bound level in the window (excited
    levels lie at larger eta). When nothing passes, returns found = False
    with the full scan trace and a reason string.
    """
    settings = settings or SolverSettings()
    trace: list = []
    prev_eta = None
    prev_delta = None
    saw_island = False
    saw_bracket = False
    for eta in _scan_etas(settings.eta_window, settings.scan_points):
        eta = float(eta)
        delta_val, _, _ = _evaluate_trial(eta, config, settings)
        trace.append((eta, delta_val))
        if delta_val is None:
            prev_eta = prev_delta = None
            continue
        saw_island = True
        if (
            prev_delta is not None
            and math.isfinite(prev_delta)
            and math.isfinite(delta_val)
            and (delta_val < 0.0) != (prev_delta < 0.0)
        ):
            saw_bracket = True
            hit = _bisect_bracket(prev_eta, prev_delta, eta, delta_val, config, settings)
            if hit is not None:
                eta_star, residual, m_star, grid_star = hit
                if abs(residual) <= settings.mismatch_tol:
                    trace.append((eta_star, residual))
                    return EigenResult(
                        found=True,
                        eta_star=eta_star,
                        epsilon_ev=-(1.0 - eta_star) * config.mass,
                        match_rho=float(grid_star.nodes()[m_star]),
                        mismatch_residual=abs(residual),
                        scan_trace=trace,
                        verdict_reason="accepted lowest-eta mismatch root (deepest binding)",
                    )
        prev_eta, prev_delta = eta, delta_val

    if not saw_island:
        reason = "no classically-allowed island at any scanned energy (no turning point)"
        residual = math.nan
    elif not saw_bracket:
        reason = "mismatch never changes sign across the scan window"
        residual = min(abs(d) for _, d in trace if d is not None and math.isfinite(d))
    else:
        reason = "all mismatch sign changes failed the acceptance tolerance (poles)"
        residual = min(abs(d) for _, d in trace if d is not None and math.isfinite(d))
    return EigenResult(
        found=False,
        eta_star=None,
        epsilon_ev=None,
        match_rho=None,
        mismatch_residual=residual,
        scan_trace=trace,
        verdict_reason=reason,
    )


def _scan_one(payload):
    d, ansatz_value, ell, mass, settings = payload
    config = PhysicalConfig(dimension=d, ell=ell, mass=mass, ansatz=Ansatz(ansatz_value))
    try:
        return d, solve_ground_state(config, settings)
    except Exception as exc:  # per-dimension failures recorded inline
        return d, EigenResult(
            found=False,
            eta_star=None,
            epsilon_ev=None,
            match_rho=None,
            mismatch_residual=math.nan,
            scan_trace=[],
            verdict_reason=f"error: {exc!r}",
        )


def dimension_scan(
    d_range: tuple,
    ansatz: Ansatz,
    settings: SolverSettings | None = None,
    ell: int = 0,
    mass: float | None = None,
    workers: int = 1,
):
    """Ground-state search per dimension over an inclusive range.

    Returns [(D, EigenResult), ...] ordered by D. Each dimension is an
    independent computation; with workers > 1 they run in separate
    processes, merged in D order so the output matches a serial run.
    """
    from .core import ELECTRON_MASS_EV

    d_lo, d_hi = d_range
    if d_lo > d_hi:
        raise ConfigError(f"empty dimension range {d_range!r}")
    settings = settings or SolverSettings()
    mass = ELECTRON_MASS_EV if mass is None else mass
    payloads = [(d, ansatz.value, ell, mass, settings) for d in range(d_lo, d_hi + 1)]
    if workers > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(payloads))) as pool:
            results = list(pool.map(_scan_one, payloads))
    else:
        results = [_scan_one(p) for p in payloads]
    return sorted(results, key=lambda item: item[0])


def eigenfunction(config: PhysicalConfig, settings: SolverSettings | None, eta_star: float) -> WaveSolution:
    """Stitched, unit-norm phi_+ at an accepted eigenvalue, with F and G.

    The two propagations are joined at the match node (the right half is
    rescaled to agree there), normalized to unit discrete L2 norm, and the
    partner component phi_- is recovered from the first-order relation

        phi_- = -[phi_+' - (tau/rho^power - 1/2) phi_+] / (K/rho + tau'/rho^power),

    from which F and G follow. F and G are reported in mass-normalized units.
    """
    settings = settings or SolverSettings()
    state = dimensionless_state(config, eta_star)
    coeffs = build_coefficients(state, config)
    grid = settings.resolve_grid(coeffs.turning_scale)
    m = _match_index(coeffs, grid, settings.min_island_nodes)
    if m is None:
        raise ConfigError(f"no interior turning point at eta = {eta_star!r}; not an eigenvalue")
    nodes = grid.nodes()
    n = grid.n_points
    h = grid.step
    left, right = _propagate_halves(coeffs, grid, m, settings.scheme)
    left = np.asarray(left)
    right = np.asarray(right)
    if settings.scheme is Scheme.CANONICAL:
        factor = np.asarray(coeffs.integrating_factor_fn(nodes), dtype=float)
        left = left * factor
        right = right * factor
    if right[m] == 0.0:
        raise NonFiniteValue("right propagation vanishes at the match node", eta=eta_star)
    phi = np.empty(n)
    phi[: m + 1] = left[: m + 1]
    phi[m:] = right[m:] * (left[m] / right[m])
    norm = discrete_l2_norm(phi, h)
    phi = phi / norm
    if phi[np.argmax(np.abs(phi))] < 0.0:
        phi = -phi  # fix the overall sign so the principal lobe is positive

    power = coeffs.singular_power
    rho_pow = nodes**power if power != 1 else nodes
    dphi = np.gradient(phi, h)
    level = coeffs.match_level
    level_prime = coeffs.turning_scale
    denom = coeffs.k_value / nodes + level_prime / rho_pow
    phi_minus = -(dphi - (level / rho_pow - 0.5) * phi) / denom
    f_comp, g_comp = reconstruct_fg(phi, phi_minus, 1.0, state.eta)
    return WaveSolution(grid=grid, phi_plus=phi, f_component=f_comp, g_component=g_comp, norm=norm)
